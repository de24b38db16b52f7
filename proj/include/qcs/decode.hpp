#pragma once

// Reconstruction from quantized partial circulant measurements: the
// noise- and quantization-aware l1 program, plain l1 with a residual ball,
// the Sobolev dual on a known support, and the two-stage decoder.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "qcs/core.hpp"
#include "qcs/operators.hpp"
#include "qcs/pdhg.hpp"

namespace qcs {

struct DecodeProblem {
  MeasurementEnsemble ens;
  int r = 1;
  Vector q;
  double gamma_r = 0.0;
  double eps = 0.0;
  SolverOptions solver;
};

struct DecodeResult {
  Vector xhat;
  Vector nuhat;
  double objective = 0.0;
  double residual_quant = 0.0;  // max(0, ||D^{-r}(A xhat + nuhat - q)|| - gamma sqrt(m))
  double residual_noise = 0.0;  // max(0, ||nuhat|| - eps sqrt(m))
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline DecodeResult to_result(SolverReport rep) {
  DecodeResult out;
  out.xhat = std::move(rep.z);
  out.nuhat = std::move(rep.nu);
  out.objective = rep.objective;
  out.residual_quant = rep.violation_main;
  out.residual_noise = rep.violation_nu;
  out.gap = rep.gap;
  out.iterations = rep.iterations;
  out.converged = rep.converged;
  return out;
}

}  // namespace detail

/// min ||z||_1  s.t.  ||D^{-r}(A z + nu - q)||_2 <= gamma sqrt(m),  ||nu||_2 <= eps sqrt(m).
inline DecodeResult decode_sd(const DecodeProblem& prob) {
  prob.ens.validate();
  require(prob.r >= 1, "decode_sd: order must be >= 1");
  require(prob.q.size() == prob.ens.m(), "decode_sd: q length differs from m");
  require(prob.gamma_r > 0.0 && std::isfinite(prob.gamma_r), "decode_sd: gamma must be positive");
  require(prob.eps >= 0.0 && std::isfinite(prob.eps), "decode_sd: eps must be nonnegative");
  const double root_m = std::sqrt(static_cast<double>(prob.ens.m()));
  MeasurementOperator a(prob.ens);
  L1ConstrainedSolver solver(a, prob.r, prob.q, prob.eps * root_m, prob.gamma_r * root_m, prob.solver);
  return detail::to_result(solver.solve());
}

/// min ||z||_1  s.t.  ||A z - y||_2 <= eps.
inline DecodeResult decode_l1(const MeasurementEnsemble& ens, const Vector& y, double eps,
                              SolverOptions opts = {}) {
  ens.validate();
  require(y.size() == ens.m(), "decode_l1: y length differs from m");
  require(eps >= 0.0 && std::isfinite(eps), "decode_l1: eps must be nonnegative");
  MeasurementOperator a(ens);
  L1ConstrainedSolver solver(a, 0, y, eps, 0.0, opts);
  DecodeResult out = detail::to_result(solver.solve());
  // nu is the residual slack here, not a noise estimate in the sense of decode_sd.
  out.residual_noise = 0.0;
  return out;
}

/// Thrown when D^{-r} A_T does not have full column rank.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// xhat_T = (D^{-r} A_T)^+ D^{-r} q, zero off T.
inline Vector sobolev_dual_decode(const MeasurementEnsemble& ens, const DifferenceOperator& diff,
                                  const Vector& q, const IndexList& support) {
  ens.validate();
  require(q.size() == ens.m(), "sobolev_dual_decode: q length differs from m");
  require(diff.size() == ens.m(), "sobolev_dual_decode: difference operator size differs from m");
  validate_omega(support, ens.N());
  const Index k = static_cast<Index>(support.size());
  require(k <= ens.m(), "sobolev_dual_decode: support larger than m");
  Vector xhat = Vector::Zero(ens.N());
  if (k == 0) return xhat;

  const Index n = ens.N();
  Matrix b(ens.m(), k);
  for (Index c = 0; c < k; ++c) {
    const Index col = support[static_cast<std::size_t>(c)];
    Vector a_col(ens.m());
    for (Index p = 0; p < ens.m(); ++p)
      a_col(p) = ens.xi((ens.omega[static_cast<std::size_t>(p)] - col + n) % n);
    b.col(c) = diff.apply_inverse_power(a_col);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  if (qr.rank() < k) {
    std::ostringstream msg;
    msg << "sobolev_dual_decode: D^-" << diff.order() << " A_T is rank deficient (rank " << qr.rank()
        << " < " << k << ") for T = {";
    for (Index c = 0; c < k; ++c) msg << (c ? "," : "") << support[static_cast<std::size_t>(c)] + 1;
    msg << "}";
    throw RankDeficientError(msg.str());
  }
  const Vector coeffs = qr.solve(diff.apply_inverse_power(q));
  for (Index c = 0; c < k; ++c) xhat(support[static_cast<std::size_t>(c)]) = coeffs(c);
  return xhat;
}

/// Indices of the s largest magnitudes; ties prefer the smaller index.
inline IndexList top_s_support(const Vector& x, Index s) {
  require(s >= 0 && s <= x.size(), "top_s_support: s outside [0, N]");
  IndexList idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Index{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](Index a, Index b) { return std::abs(x(a)) > std::abs(x(b)); });
  idx.resize(static_cast<std::size_t>(s));
  std::sort(idx.begin(), idx.end());
  return idx;
}

struct TwoStageResult {
  Vector xhat;
  IndexList support;
  DecodeResult stage1;
};

/// l1 support estimate on q with radius (gamma + eps) sqrt(m), then the
/// Sobolev dual on the top-s entries. The radius does not always contain the
/// truth (A x - q = D^r u - e), but stage one only has to rank coefficients.
inline TwoStageResult two_stage_decode(const MeasurementEnsemble& ens, int r, const Vector& q,
                                       Index s, double gamma_r, double eps, SolverOptions opts = {}) {
  ens.validate();
  require(s >= 0 && s <= ens.m(), "two_stage_decode: need 0 <= s <= m");
  require(gamma_r > 0.0, "two_stage_decode: gamma must be positive");
  TwoStageResult out;
  if (s == 0) {
    out.xhat = Vector::Zero(ens.N());
    return out;
  }
  const double radius = (gamma_r + eps) * std::sqrt(static_cast<double>(ens.m()));
  out.stage1 = decode_l1(ens, q, radius, opts);
  out.support = top_s_support(out.stage1.xhat, s);
  out.xhat = sobolev_dual_decode(ens, DifferenceOperator(r, ens.m()), q, out.support);
  return out;
}

}  // namespace qcs
