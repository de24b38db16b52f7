#pragma once

// Linear-algebra core: circulant actions, row subsampling, the partial
// circulant measurement map, difference-matrix powers with their SVD, the
// top-singular-direction projection and the Fourier sup-norm.
//
// Indices are 0-based in memory. File formats and user-facing messages use
// 1-based indices.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "qcs/core.hpp"

namespace qcs {

using ComplexVector = Eigen::VectorXcd;

/// Sizes at or above this use the FFT path for circulant products.
inline constexpr Index kFftThreshold = 64;

namespace detail {

inline Eigen::FFT<double>& fft_engine() {
  thread_local Eigen::FFT<double> engine;
  return engine;
}

inline ComplexVector dft(const Vector& x) {
  ComplexVector out(x.size());
  fft_engine().fwd(out, x);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Circulant matrices
//
// C_xi has first column xi and every further column is the previous one
// cyclically shifted down by one: C_xi(i, j) = xi((i - j) mod N). With this
// layout C_xi x is the circular convolution xi * x, so C_xi x = C_x xi and
// C_{e_1} is the identity.
// ---------------------------------------------------------------------------

inline Matrix circulant_matrix(const Vector& xi) {
  const Index n = xi.size();
  Matrix c(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) c(i, j) = xi((i - j + n) % n);
  return c;
}

inline Vector apply_circulant_direct(const Vector& xi, const Vector& x) {
  require(xi.size() == x.size(), "apply_circulant: generator and vector lengths differ");
  const Index n = xi.size();
  Vector out = Vector::Zero(n);
  for (Index j = 0; j < n; ++j) {
    const double xj = x(j);
    if (xj == 0.0) continue;
    for (Index i = 0; i < n; ++i) out(i) += xi((i - j + n) % n) * xj;
  }
  return out;
}

inline Vector apply_circulant_fft(const Vector& xi, const Vector& x) {
  require(xi.size() == x.size(), "apply_circulant: generator and vector lengths differ");
  const Index n = xi.size();
  if (n == 0) return Vector();
  ComplexVector spectrum = detail::dft(xi).cwiseProduct(detail::dft(x));
  ComplexVector full(n);
  detail::fft_engine().inv(full, spectrum);
  const double residue = full.imag().norm();
  const double scale = std::max(xi.norm() * x.norm(), std::numeric_limits<double>::min());
  if (residue >= 1e-9 * scale)
    throw std::logic_error("apply_circulant: imaginary residue " + std::to_string(residue) +
                           " exceeds tolerance");
  return full.real();
}

/// C_xi x, by FFT for N >= kFftThreshold and by direct summation below.
inline Vector apply_circulant(const Vector& xi, const Vector& x) {
  require(xi.size() == x.size(), "apply_circulant: generator and vector lengths differ");
  return xi.size() >= kFftThreshold ? apply_circulant_fft(xi, x) : apply_circulant_direct(xi, x);
}

/// C_xi^T x; the transpose is the circulant generated by (xi_1, xi_N, ..., xi_2).
inline Vector apply_circulant_transpose(const Vector& xi, const Vector& x) {
  require(xi.size() == x.size(), "apply_circulant_transpose: lengths differ");
  const Index n = xi.size();
  Vector flipped(n);
  for (Index k = 0; k < n; ++k) flipped(k) = xi((n - k) % n);
  return apply_circulant(flipped, x);
}

// ---------------------------------------------------------------------------
// Row subsampling
// ---------------------------------------------------------------------------

using IndexList = std::vector<Index>;

inline void validate_omega(const IndexList& omega, Index n) {
  std::vector<char> seen(static_cast<std::size_t>(std::max<Index>(n, 0)), 0);
  for (Index k : omega) {
    if (k < 0 || k >= n) {
      std::ostringstream msg;
      msg << "sample index " << k + 1 << " outside [1, " << n << "]";
      throw InputError(msg.str());
    }
    if (seen[static_cast<std::size_t>(k)]) {
      std::ostringstream msg;
      msg << "sample index " << k + 1 << " repeated; sampling must be without replacement";
      throw InputError(msg.str());
    }
    seen[static_cast<std::size_t>(k)] = 1;
  }
}

/// R_Omega v: output_j = v(omega_j).
inline Vector subsample(const Vector& v, const IndexList& omega) {
  validate_omega(omega, v.size());
  Vector out(static_cast<Index>(omega.size()));
  for (std::size_t j = 0; j < omega.size(); ++j) out(static_cast<Index>(j)) = v(omega[j]);
  return out;
}

/// R_Omega^T w: scatters w into a length-n vector.
inline Vector scatter(const Vector& w, const IndexList& omega, Index n) {
  require(static_cast<Index>(omega.size()) == w.size(), "scatter: length mismatch");
  Vector out = Vector::Zero(n);
  for (std::size_t j = 0; j < omega.size(); ++j) out(omega[j]) = w(static_cast<Index>(j));
  return out;
}

/// Ordered sample of m distinct indices from [0, n), uniform over all such
/// tuples, drawn sequentially from the remaining pool. Draw order is kept.
inline IndexList sample_omega(Index n, Index m, Rng& rng) {
  require(n >= 1 && m >= 1, "sample_omega: need N >= 1 and m >= 1");
  require(m <= n, "sample_omega: m exceeds N");
  IndexList pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index j = 0; j < m; ++j) {
    std::uniform_int_distribution<Index> pick(j, n - 1);
    std::swap(pool[static_cast<std::size_t>(j)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(m));
  return pool;
}

// ---------------------------------------------------------------------------
// Partial random circulant ensemble A = R_Omega C_xi
// ---------------------------------------------------------------------------

enum class GeneratorKind { gaussian, rademacher };

struct MeasurementEnsemble {
  Vector xi;
  IndexList omega;

  Index N() const { return xi.size(); }
  Index m() const { return static_cast<Index>(omega.size()); }

  void validate() const {
    require(N() >= 1, "ensemble: empty generator");
    require(m() >= 1 && m() <= N(), "ensemble: need 1 <= m <= N");
    require(xi.allFinite(), "ensemble: generator has non-finite entries");
    validate_omega(omega, N());
  }
};

inline MeasurementEnsemble make_ensemble(Vector xi, IndexList omega) {
  MeasurementEnsemble ens{std::move(xi), std::move(omega)};
  ens.validate();
  return ens;
}

inline Vector draw_generator(Index n, GeneratorKind kind, Rng& rng) {
  Vector xi(n);
  if (kind == GeneratorKind::gaussian) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (Index i = 0; i < n; ++i) xi(i) = g(rng);
  } else {
    std::bernoulli_distribution coin(0.5);
    for (Index i = 0; i < n; ++i) xi(i) = coin(rng) ? 1.0 : -1.0;
  }
  return xi;
}

inline MeasurementEnsemble draw_ensemble(Index n, Index m, GeneratorKind kind, Rng& rng) {
  Vector xi = draw_generator(n, kind, rng);
  IndexList omega = sample_omega(n, m, rng);
  return make_ensemble(std::move(xi), std::move(omega));
}

/// R_Omega C_xi x.
inline Vector measure(const MeasurementEnsemble& ens, const Vector& x) {
  require(x.size() == ens.N(), "measure: signal length differs from N");
  return subsample(apply_circulant(ens.xi, x), ens.omega);
}

/// Dense m x N matrix R_Omega C_xi.
inline Matrix measurement_matrix(const MeasurementEnsemble& ens) {
  const Index n = ens.N();
  Matrix a(ens.m(), n);
  for (Index p = 0; p < ens.m(); ++p) {
    const Index row = ens.omega[static_cast<std::size_t>(p)];
    for (Index j = 0; j < n; ++j) a(p, j) = ens.xi((row - j + n) % n);
  }
  return a;
}

/// Repeated forward/adjoint products with a fixed ensemble. The generator's
/// spectrum is cached; each instance owns its FFT plans, so share nothing
/// across threads.
class MeasurementOperator {
 public:
  explicit MeasurementOperator(const MeasurementEnsemble& ens)
      : xi_(ens.xi), omega_(ens.omega), use_fft_(ens.N() >= kFftThreshold) {
    ens.validate();
    if (use_fft_) {
      fft_.SetFlag(Eigen::FFT<double>::HalfSpectrum);
      fft_.fwd(xi_hat_, xi_);
      work_real_.resize(xi_.size());
    }
  }

  Index rows() const { return static_cast<Index>(omega_.size()); }
  Index cols() const { return xi_.size(); }

  Vector apply(const Vector& x) {
    Vector full(cols());
    if (use_fft_) {
      fft_.fwd(work_hat_, x);
      work_hat_ = work_hat_.cwiseProduct(xi_hat_);
      fft_.inv(full, work_hat_, cols());
    } else {
      full = apply_circulant_direct(xi_, x);
    }
    Vector out(rows());
    for (Index p = 0; p < rows(); ++p) out(p) = full(omega_[static_cast<std::size_t>(p)]);
    return out;
  }

  Vector apply_transpose(const Vector& y) {
    work_real_ = Vector::Zero(cols());
    for (Index p = 0; p < rows(); ++p) work_real_(omega_[static_cast<std::size_t>(p)]) = y(p);
    if (!use_fft_) return apply_circulant_transpose(xi_, work_real_);
    fft_.fwd(work_hat_, work_real_);
    work_hat_ = work_hat_.cwiseProduct(xi_hat_.conjugate());
    Vector out(cols());
    fft_.inv(out, work_hat_, cols());
    return out;
  }

 private:
  Vector xi_;
  IndexList omega_;
  bool use_fft_;
  Eigen::FFT<double> fft_;
  ComplexVector xi_hat_;
  ComplexVector work_hat_;
  Vector work_real_;
};

// ---------------------------------------------------------------------------
// Difference matrices
//
// D is unit lower bidiagonal with -1 on the subdiagonal. D^{-1} is the
// cumulative sum, so every power is applied in O(r m) without forming it.
// ---------------------------------------------------------------------------

class DifferenceOperator {
 public:
  DifferenceOperator(int order, Index size) : order_(order), size_(size) {
    require(order >= 0, "difference operator: order must be nonnegative");
    require(size >= 1, "difference operator: size must be positive");
  }

  int order() const { return order_; }
  Index size() const { return size_; }

  /// D^r v
  Vector apply_power(Vector v) const {
    check(v);
    for (int k = 0; k < order_; ++k)
      for (Index i = size_ - 1; i >= 1; --i) v(i) -= v(i - 1);
    return v;
  }

  /// D^{-r} v
  Vector apply_inverse_power(Vector v) const {
    check(v);
    for (int k = 0; k < order_; ++k)
      for (Index i = 1; i < size_; ++i) v(i) += v(i - 1);
    return v;
  }

  /// (D^r)^T v
  Vector apply_power_transpose(Vector v) const {
    check(v);
    for (int k = 0; k < order_; ++k)
      for (Index i = 0; i + 1 < size_; ++i) v(i) -= v(i + 1);
    return v;
  }

  /// (D^{-r})^T v
  Vector apply_inverse_power_transpose(Vector v) const {
    check(v);
    for (int k = 0; k < order_; ++k)
      for (Index i = size_ - 2; i >= 0; --i) v(i) += v(i + 1);
    return v;
  }

 private:
  void check(const Vector& v) const {
    require(v.size() == size_, "difference operator: vector length differs from m");
  }

  int order_;
  Index size_;
};

/// Dense D^r, D^{-r} and the SVD D^{-r} = U S V^T (singular values descending).
struct DifferenceSystem {
  int r = 0;
  Index m = 0;
  Eigen::MatrixXi Dr;
  Matrix DrInv;
  Matrix U;
  Vector S;
  Matrix V;

  DifferenceOperator op() const { return DifferenceOperator(r, m); }
};

inline Eigen::MatrixXi difference_matrix(Index m) {
  Eigen::MatrixXi d = Eigen::MatrixXi::Identity(m, m);
  for (Index i = 1; i < m; ++i) d(i, i - 1) = -1;
  return d;
}

inline DifferenceSystem build_difference_system(int r, Index m) {
  require(r >= 1, "difference system: order must be >= 1");
  require(m >= r, "difference system: need m >= r");
  DifferenceSystem sys;
  sys.r = r;
  sys.m = m;
  const Eigen::MatrixXi d = difference_matrix(m);
  sys.Dr = Eigen::MatrixXi::Identity(m, m);
  for (int k = 0; k < r; ++k) sys.Dr = (sys.Dr * d).eval();

  // Columns of D^{-r} are r-fold cumulative sums of unit vectors; all entries
  // are binomial coefficients and exact in double for the sizes used here.
  const DifferenceOperator op(r, m);
  sys.DrInv.resize(m, m);
  for (Index j = 0; j < m; ++j) sys.DrInv.col(j) = op.apply_inverse_power(Vector::Unit(m, j));

  Eigen::BDCSVD<Matrix> svd(sys.DrInv, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sys.U = svd.matrixU();
  sys.S = svd.singularValues();
  sys.V = svd.matrixV();
  return sys;
}

/// First ell coordinates of V^T w: the components along the ell dominant
/// right singular directions of D^{-r}.
inline Vector project_top(const Matrix& v, Index ell, const Vector& w) {
  require(v.rows() == w.size() && v.cols() == w.size(), "project_top: dimension mismatch");
  require(ell >= 1 && ell <= v.cols(), "project_top: ell outside [1, m]");
  return v.leftCols(ell).transpose() * w;
}

// ---------------------------------------------------------------------------
// Sparse signals and the Fourier sup-norm
// ---------------------------------------------------------------------------

struct SparseSignal {
  Index N = 0;
  IndexList support;
  Vector values;

  void validate() const {
    require(static_cast<Index>(support.size()) == values.size(),
            "sparse signal: support and value counts differ");
    validate_omega(support, N);
  }

  Vector dense() const {
    validate();
    return scatter(values, support, N);
  }
};

/// max_k |(F x)_k| with F the unnormalized DFT.
inline double fourier_sup_norm(const Vector& x) {
  if (x.size() == 0) return 0.0;
  return detail::dft(x).cwiseAbs().maxCoeff();
}

}  // namespace qcs
