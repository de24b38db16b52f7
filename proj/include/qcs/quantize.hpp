#pragma once

// Scalar, memoryless (MSQ) and greedy r-th order Sigma-Delta quantization.

#include <cmath>
#include <string>
#include <vector>

#include "qcs/core.hpp"
#include "qcs/operators.hpp"

namespace qcs {

/// Mid-rise alphabet {±(2l+1) step/2 : 0 <= l < levels}. The 1-bit alphabet
/// {-1, +1} is the mid-rise alphabet with one level and step 2.
struct Alphabet {
  enum class Kind { midrise, one_bit };

  Kind kind = Kind::one_bit;
  int levels = 1;
  double step = 2.0;

  static Alphabet one_bit() { return Alphabet{Kind::one_bit, 1, 2.0}; }

  static Alphabet midrise(int levels, double step) {
    require(levels >= 1, "alphabet: levels must be positive");
    require(step > 0.0 && std::isfinite(step), "alphabet: step must be positive");
    return Alphabet{Kind::midrise, levels, step};
  }

  double max_element() const { return (levels - 0.5) * step; }

  /// Ascending list of the 2L elements.
  std::vector<double> elements() const {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(2 * levels));
    for (int l = levels - 1; l >= 0; --l) out.push_back(-(2 * l + 1) * step / 2);
    for (int l = 0; l < levels; ++l) out.push_back((2 * l + 1) * step / 2);
    return out;
  }

  bool contains(double v) const {
    for (double e : elements())
      if (e == v) return true;
    return false;
  }

  std::string describe() const {
    if (kind == Kind::one_bit) return "one_bit";
    return "midrise(L=" + std::to_string(levels) + ",step=" + std::to_string(step) + ")";
  }
};

/// Nearest alphabet element; ties go to the larger element, values beyond
/// the range saturate at the extreme elements.
inline double scalar_quantize(double z, const Alphabet& a) {
  const double cell = std::floor(z / a.step);
  const double top = static_cast<double>(a.levels - 1);
  const double clamped = std::min(std::max(cell, -top - 1.0), top);
  return (clamped + 0.5) * a.step;
}

inline Vector msq(const Vector& y, const Alphabet& a) {
  Vector q(y.size());
  for (Index i = 0; i < y.size(); ++i) q(i) = scalar_quantize(y(i), a);
  return q;
}

struct SigmaDeltaRun {
  int r = 0;
  Vector q;
  Vector u;
  double stability_bound = 0.0;
  bool stable = false;
};

/// Largest input amplitude mu for which the greedy scheme of order r is
/// guaranteed stable with this alphabet: levels >= mu/step + (2^r - 1)/2.
inline double greedy_admissible_amplitude(int r, const Alphabet& a) {
  return (a.levels - (std::ldexp(1.0, r) - 1.0) / 2.0) * a.step;
}

namespace detail {

inline std::vector<double> binomial_row(int r) {
  std::vector<double> c(static_cast<std::size_t>(r) + 1, 1.0);
  for (int j = 1; j <= r; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j) - 1] * (r - j + 1) / j;
  return c;
}

}  // namespace detail

/// Greedy r-th order Sigma-Delta with zero initial state:
///   rho_i = y_i - sum_{j=1..r} C(r,j) (-1)^j u_{i-j},  q_i = Q(rho_i),  u_i = rho_i - q_i,
/// so that D^r u = y - q. The stability bound is step/2; `stable` reports
/// whether the trajectory actually stayed inside it.
inline SigmaDeltaRun sigma_delta(const Vector& y, int r, const Alphabet& a) {
  require(y.size() >= 1, "sigma_delta: empty input");
  require(r >= 1, "sigma_delta: order must be >= 1");
  require(y.allFinite(), "sigma_delta: non-finite input");
  const Index m = y.size();
  const auto binom = detail::binomial_row(r);

  SigmaDeltaRun run;
  run.r = r;
  run.q.resize(m);
  run.u.resize(m);
  run.stability_bound = a.step / 2;
  for (Index i = 0; i < m; ++i) {
    double rho = y(i);
    for (int j = 1; j <= r && j <= i; ++j) {
      const double sign = (j % 2 == 1) ? 1.0 : -1.0;
      rho += sign * binom[static_cast<std::size_t>(j)] * run.u(i - j);
    }
    run.q(i) = scalar_quantize(rho, a);
    run.u(i) = rho - run.q(i);
  }
  run.stable = norm_inf(run.u) <= run.stability_bound * (1.0 + 1e-12);
  return run;
}

/// ||D^r u - (y - q)||_inf using the banded difference operator.
inline double verify_sd_identity(const SigmaDeltaRun& run, const Vector& y) {
  require(run.u.size() == y.size() && run.q.size() == y.size(),
          "verify_sd_identity: length mismatch");
  const DifferenceOperator d(run.r, y.size());
  return norm_inf(d.apply_power(run.u) - (y - run.q));
}

}  // namespace qcs
