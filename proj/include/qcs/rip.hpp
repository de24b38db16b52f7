#pragma once

// Monte-Carlo and exact checks for the composite matrix
//   M = (1/sqrt(ell)) P_ell V^T R_Omega C_xi,
// where V holds the right singular vectors of D^{-r} and P_ell keeps the
// ell dominant directions.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcs/core.hpp"
#include "qcs/operators.hpp"

namespace qcs {

struct CompositeSpec {
  Index N = 0;
  Index m = 0;
  Index s = 0;
  double alpha = 0.0;
  int r = 1;
  Index ell_override = 0;  // > 0 fixes ell instead of deriving it from alpha

  void validate() const {
    require(N >= 1 && m >= 1 && m <= N, "composite spec: need 1 <= m <= N");
    require(s >= 1 && s <= N, "composite spec: need 1 <= s <= N");
    require(alpha >= 0.0 && alpha < 0.5, "composite spec: alpha must lie in [0, 1/2)");
    require(r >= 1 && r <= m, "composite spec: need 1 <= r <= m");
    require(ell_override >= 0 && ell_override <= m, "composite spec: ell must lie in [1, m]");
  }

  /// round-half-up of m (s/m)^alpha, clamped to [1, m], unless overridden.
  Index ell() const {
    if (ell_override > 0) return ell_override;
    const double raw = static_cast<double>(m) *
                       std::pow(static_cast<double>(s) / static_cast<double>(m), alpha);
    return std::clamp<Index>(static_cast<Index>(std::floor(raw + 0.5)), 1, m);
  }
};

inline Matrix composite_matrix(const MeasurementEnsemble& ens, const DifferenceSystem& diff, Index ell) {
  ens.validate();
  require(diff.m == ens.m(), "composite_matrix: difference system size differs from m");
  require(ell >= 1 && ell <= ens.m(), "composite_matrix: ell outside [1, m]");
  return diff.V.leftCols(ell).transpose() * measurement_matrix(ens) /
         std::sqrt(static_cast<double>(ell));
}

struct RipEstimate {
  Index s = 0;
  Index supports = 0;
  bool exhaustive = false;
  double delta_hat = 0.0;
  std::vector<double> lambda_min;
  std::vector<double> lambda_max;
};

/// Supports with C(N, s) at or below this count are enumerated.
inline constexpr double kRipEnumerationLimit = 5000.0;

inline double binomial(Index n, Index k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (Index j = 1; j <= k; ++j) out = out * static_cast<double>(n - k + j) / static_cast<double>(j);
  return out;
}

/// Extreme eigenvalues of M_T^T M_T over the given supports.
inline RipEstimate rip_on_supports(const Matrix& m, const std::vector<IndexList>& supports) {
  RipEstimate est;
  est.s = supports.empty() ? 0 : static_cast<Index>(supports.front().size());
  est.supports = static_cast<Index>(supports.size());
  for (const auto& t : supports) {
    validate_omega(t, m.cols());
    Matrix sub(m.rows(), static_cast<Index>(t.size()));
    for (std::size_t c = 0; c < t.size(); ++c) sub.col(static_cast<Index>(c)) = m.col(t[c]);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sub.transpose() * sub, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    est.lambda_min.push_back(lo);
    est.lambda_max.push_back(hi);
    est.delta_hat = std::max({est.delta_hat, 1.0 - lo, hi - 1.0});
  }
  return est;
}

/// Lower estimate of the order-s restricted isometry constant of M. All
/// supports are used when C(N, s) <= kRipEnumerationLimit; otherwise
/// `trials` uniformly random supports.
inline RipEstimate rip_monte_carlo(const Matrix& m, Index s, Index trials, Rng& rng) {
  const Index n = m.cols();
  require(s >= 1 && s <= n, "rip_monte_carlo: need 1 <= s <= N");
  require(trials >= 1, "rip_monte_carlo: need at least one trial");
  std::vector<IndexList> supports;
  const bool exhaustive = binomial(n, s) <= kRipEnumerationLimit;
  if (exhaustive) {
    IndexList t(static_cast<std::size_t>(s));
    std::iota(t.begin(), t.end(), Index{0});
    while (true) {
      supports.push_back(t);
      Index k = s - 1;
      while (k >= 0 && t[static_cast<std::size_t>(k)] == n - s + k) --k;
      if (k < 0) break;
      ++t[static_cast<std::size_t>(k)];
      for (Index j = k + 1; j < s; ++j) t[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j) - 1] + 1;
    }
  } else {
    for (Index k = 0; k < trials; ++k) {
      IndexList t = sample_omega(n, s, rng);
      std::sort(t.begin(), t.end());
      supports.push_back(std::move(t));
    }
  }
  RipEstimate est = rip_on_supports(m, supports);
  est.s = s;
  est.exhaustive = exhaustive;
  return est;
}

// ---------------------------------------------------------------------------
// Expectation identity
// ---------------------------------------------------------------------------

/// (1/ell) ||P_ell V^T R_omega C_x||_F^2.
inline double composite_frobenius_sq(const Vector& x, const Matrix& v, Index ell, const IndexList& omega) {
  const Index n = x.size();
  Matrix rows(static_cast<Index>(omega.size()), n);
  for (std::size_t p = 0; p < omega.size(); ++p)
    for (Index k = 0; k < n; ++k) rows(static_cast<Index>(p), k) = x((omega[p] - k + n) % n);
  return (v.leftCols(ell).transpose() * rows).squaredNorm() / static_cast<double>(ell);
}

/// (s-1)(m-ell) / (ell (N-1)).
inline double expectation_bound(const CompositeSpec& spec) {
  const Index ell = spec.ell();
  if (spec.N == 1) return 0.0;
  return static_cast<double>(spec.s - 1) * static_cast<double>(spec.m - ell) /
         (static_cast<double>(ell) * static_cast<double>(spec.N - 1));
}

struct ExpectationCheck {
  double empirical_mean = 0.0;
  double deviation = 0.0;  // |empirical_mean - 1|
  double bound = 0.0;
  Index draws = 0;
};

inline void require_unit(const Vector& x, const char* what) {
  require(x.allFinite() && std::abs(x.norm() - 1.0) <= 1e-10, std::string(what) + ": vector must have unit norm");
}

inline Index nonzeros(const Vector& x) { return static_cast<Index>((x.array() != 0.0).count()); }

/// Averages (1/ell)||P_ell V^T R_Omega C_x||_F^2 (= E_xi of the squared
/// composite norm given Omega) over random Omega.
inline ExpectationCheck expectation_check(const Vector& x, const CompositeSpec& spec,
                                          const DifferenceSystem& diff, Index omega_draws, Rng& rng) {
  spec.validate();
  require(x.size() == spec.N, "expectation_check: x length differs from N");
  require_unit(x, "expectation_check");
  require(nonzeros(x) <= spec.s, "expectation_check: x has more than s nonzeros");
  require(diff.m == spec.m && diff.r == spec.r, "expectation_check: difference system mismatch");
  require(omega_draws >= 1, "expectation_check: need at least one draw");
  const Index ell = spec.ell();
  double sum = 0.0;
  for (Index d = 0; d < omega_draws; ++d)
    sum += composite_frobenius_sq(x, diff.V, ell, sample_omega(spec.N, spec.m, rng));
  ExpectationCheck out;
  out.draws = omega_draws;
  out.empirical_mean = sum / static_cast<double>(omega_draws);
  out.deviation = std::abs(out.empirical_mean - 1.0);
  out.bound = expectation_bound(spec);
  return out;
}

// ---------------------------------------------------------------------------
// Bounded differences in Omega
// ---------------------------------------------------------------------------

struct BoundedDifferenceCheck {
  double max_difference = 0.0;
  double bound = 0.0;  // (12/ell) ||x - y||_hat_inf
  double max_ratio = 0.0;
  Index pairs = 0;
  bool holds = true;
};

/// Replaces `count` random coordinates of omega by indices absent from it.
inline IndexList perturb_omega(const IndexList& omega, Index n, Index count, Rng& rng) {
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Index k : omega) used[static_cast<std::size_t>(k)] = 1;
  IndexList free_idx;
  for (Index k = 0; k < n; ++k)
    if (!used[static_cast<std::size_t>(k)]) free_idx.push_back(k);
  const Index m = static_cast<Index>(omega.size());
  count = std::min({count, m, static_cast<Index>(free_idx.size())});
  IndexList out = omega;
  const IndexList positions = sample_omega(m, std::max<Index>(count, 1), rng);
  const IndexList replacements =
      free_idx.empty() ? IndexList{} : sample_omega(static_cast<Index>(free_idx.size()), std::max<Index>(count, 1), rng);
  for (Index c = 0; c < count; ++c)
    out[static_cast<std::size_t>(positions[static_cast<std::size_t>(c)])] =
        free_idx[static_cast<std::size_t>(replacements[static_cast<std::size_t>(c)])];
  return out;
}

inline BoundedDifferenceCheck bounded_difference_check(const Vector& x, const Vector& y,
                                                       const CompositeSpec& spec,
                                                       const DifferenceSystem& diff, Index trials,
                                                       Rng& rng) {
  spec.validate();
  require(x.size() == spec.N && y.size() == spec.N, "bounded_difference_check: lengths differ from N");
  require_unit(x, "bounded_difference_check");
  require_unit(y, "bounded_difference_check");
  require(diff.m == spec.m && diff.r == spec.r, "bounded_difference_check: difference system mismatch");
  const Index ell = spec.ell();
  auto f = [&](const IndexList& om) {
    return composite_frobenius_sq(x, diff.V, ell, om) - composite_frobenius_sq(y, diff.V, ell, om);
  };
  BoundedDifferenceCheck out;
  out.bound = 12.0 / static_cast<double>(ell) * fourier_sup_norm(x - y);
  std::uniform_int_distribution<Index> how_many(1, 2);
  for (Index t = 0; t < trials; ++t) {
    const IndexList om = sample_omega(spec.N, spec.m, rng);
    const IndexList om2 = perturb_omega(om, spec.N, how_many(rng), rng);
    const double diffv = std::abs(f(om) - f(om2));
    out.max_difference = std::max(out.max_difference, diffv);
    if (out.bound > 0.0) out.max_ratio = std::max(out.max_ratio, diffv / out.bound);
    ++out.pairs;
  }
  // Floating-point slack for the x == y case where both sides vanish.
  out.holds = out.max_difference <= out.bound + 1e-12;
  return out;
}

// ---------------------------------------------------------------------------
// Report records (one JSON object per line)
// ---------------------------------------------------------------------------

inline nlohmann::json report_record(const std::string& check, nlohmann::json params, double statistic,
                                    double bound, bool pass) {
  return nlohmann::json{{"check", check}, {"params", std::move(params)}, {"statistic", statistic},
                        {"bound", bound}, {"pass", pass}};
}

}  // namespace qcs
