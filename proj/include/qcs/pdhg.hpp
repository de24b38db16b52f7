#pragma once

// Restarted primal-dual hybrid gradient (Chambolle-Pock) solver for
//
//   minimize ||z||_1  subject to  A z + nu - D^r w = b,
//                                 ||nu||_2 <= nu_radius,  ||w||_2 <= w_radius.
//
// With r >= 1 the substitution w = D^{-r}(A z + nu - b) makes this the
// Sigma-Delta-aware program  ||D^{-r}(A z + nu - q)||_2 <= w_radius. With
// r = 0 the w block is dropped and nu is the residual slack of
// ||A z - b||_2 <= nu_radius. The equality form keeps the coupling operator
// well conditioned; D^{-r} never enters an iteration.
//
// Blocks are rescaled to unit operator norm, steps are fixed from a power
// iteration estimate of the scaled operator norm, and the ratio between
// primal and dual steps (the primal weight) is adapted at restarts. Restarts
// are triggered by the fixed-point residual.

#include <algorithm>
#include <cmath>
#include <limits>

#include "qcs/core.hpp"
#include "qcs/operators.hpp"

namespace qcs {

struct SolverOptions {
  /// Absolute tolerance on the original constraint violations.
  double tol_feas = 0.0;  // 0 selects 1e-6 * sqrt(m)
  /// Relative duality-gap tolerance: gap <= tol_gap * max(1, objective).
  double tol_gap = 1e-8;
  int max_iterations = 50000;
  int power_iterations = 50;
  int check_every = 32;
};

struct SolverReport {
  Vector z;
  Vector nu;
  Vector w;
  double objective = 0.0;
  double dual_bound = -std::numeric_limits<double>::infinity();
  double gap = std::numeric_limits<double>::infinity();
  double violation_main = 0.0;  // ||D^{-r}(Az+nu-b)|| - w_radius (or ||Az-b|| - nu_radius), floored at 0
  double violation_nu = 0.0;    // ||nu|| - nu_radius, floored at 0
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

namespace detail {

inline Vector project_ball(Vector v, double radius) {
  const double n = v.norm();
  if (n > radius) v *= (radius > 0.0 ? radius / n : 0.0);
  return v;
}

inline Vector soft_threshold(const Vector& v, double t) {
  return v.unaryExpr([t](double a) { return a > t ? a - t : (a < -t ? a + t : 0.0); });
}

}  // namespace detail

class L1ConstrainedSolver {
 public:
  L1ConstrainedSolver(MeasurementOperator& a, int order, Vector b, double nu_radius,
                      double w_radius, SolverOptions opts)
      : a_(a),
        diff_(order, a.rows()),
        b_(std::move(b)),
        nu_radius_(nu_radius),
        w_radius_(w_radius),
        opts_(opts) {
    require(b_.size() == a_.rows(), "solver: right-hand side length differs from m");
    require(nu_radius_ >= 0.0 && std::isfinite(nu_radius_), "solver: invalid noise radius");
    require(order == 0 || (w_radius_ > 0.0 && std::isfinite(w_radius_)),
            "solver: quantization radius must be positive");
    if (opts_.tol_feas <= 0.0) opts_.tol_feas = 1e-6 * std::sqrt(static_cast<double>(m()));
  }

  SolverReport solve() {
    estimate_scales();

    const Index n = a_.cols();
    Vector z = Vector::Zero(n), nu = Vector::Zero(m()), w = Vector::Zero(has_w() ? m() : 0);
    Vector y = Vector::Zero(m());
    Vector kx = Vector::Zero(m());

    // Primal weight: ratio of objective to right-hand-side scale in scaled units.
    const double c_norm = std::sqrt(static_cast<double>(n)) / a_scale_;
    const double b_norm = b_.norm();
    double omega = (b_norm > 0.0) ? c_norm / b_norm : 1.0;
    omega = std::clamp(omega, 1e-4, 1e4);

    Vector z0 = z, nu0 = nu, w0 = w, y0 = y;
    double fpr_at_restart = -1.0;
    double fpr_prev = std::numeric_limits<double>::infinity();
    int since_restart = 0;

    SolverReport rep;
    int it = 0;
    for (; it < opts_.max_iterations; ++it) {
      const double tau = step_ / omega;
      const double sigma = step_ * omega;

      // Primal step on scaled variables (z~ = a z, w~ = d w).
      const Vector aty = a_.apply_transpose(y) / a_scale_;
      Vector z_new = detail::soft_threshold(z - tau * aty, tau / a_scale_);
      Vector nu_new = detail::project_ball(nu - tau * y, nu_radius_);
      Vector w_new;
      if (has_w()) {
        const Vector dty = diff_.apply_power_transpose(y) / d_scale_;
        w_new = detail::project_ball(w + tau * dty, w_radius_ * d_scale_);
      }
      const Vector kx_new = apply_k(z_new, nu_new, w_new);

      // Dual step with extrapolated primal.
      Vector y_new = y + sigma * (2.0 * kx_new - kx - b_);

      // Fixed-point residual in the PDHG metric.
      const Vector dkx = kx_new - kx;
      const Vector dy = y_new - y;
      double dx2 = (z_new - z).squaredNorm() + (nu_new - nu).squaredNorm();
      if (has_w()) dx2 += (w_new - w).squaredNorm();
      const double fpr2 = dx2 / tau + dy.squaredNorm() / sigma - 2.0 * dy.dot(dkx);
      const double fpr = std::sqrt(std::max(fpr2, 0.0));

      z.swap(z_new);
      nu.swap(nu_new);
      w.swap(w_new);
      y.swap(y_new);
      kx = kx_new;
      ++since_restart;

      if ((it + 1) % opts_.check_every == 0 || it + 1 == opts_.max_iterations) {
        evaluate(z, nu, w, y, rep);
        if (rep.violation_main <= opts_.tol_feas && rep.violation_nu <= opts_.tol_feas &&
            rep.gap <= opts_.tol_gap * std::max(1.0, rep.objective)) {
          rep.converged = true;
          ++it;
          break;
        }
      }

      if (fpr_at_restart < 0.0) {
        fpr_at_restart = fpr;
      } else {
        const bool sufficient = fpr <= 0.2 * fpr_at_restart;
        const bool stalled = fpr <= 0.8 * fpr_at_restart && fpr > fpr_prev;
        const bool long_run = since_restart >= std::max(64, static_cast<int>(0.36 * (it + 1)));
        if (sufficient || stalled || long_run) {
          const double dxn = std::sqrt((z - z0).squaredNorm() + (nu - nu0).squaredNorm() +
                                       (has_w() ? (w - w0).squaredNorm() : 0.0));
          const double dyn = (y - y0).norm();
          if (dxn > 1e-14 && dyn > 1e-14)
            omega = std::clamp(std::exp(0.5 * std::log(dyn / dxn) + 0.5 * std::log(omega)), 1e-6, 1e6);
          z0 = z;
          nu0 = nu;
          w0 = w;
          y0 = y;
          since_restart = 0;
          fpr_at_restart = -1.0;
          fpr_prev = std::numeric_limits<double>::infinity();
          ++rep.restarts;
          continue;
        }
      }
      fpr_prev = fpr;
    }
    if (!rep.converged) evaluate(z, nu, w, y, rep);
    rep.iterations = it;
    return rep;
  }

 private:
  Index m() const { return a_.rows(); }
  bool has_w() const { return diff_.order() >= 1; }

  Vector apply_k(const Vector& z_scaled, const Vector& nu, const Vector& w_scaled) {
    Vector out = a_.apply(z_scaled) / a_scale_ + nu;
    if (has_w()) out -= diff_.apply_power(w_scaled) / d_scale_;
    return out;
  }

  Vector apply_k_transpose_z(const Vector& y) { return a_.apply_transpose(y) / a_scale_; }

  void estimate_scales() {
    a_scale_ = power_norm([&](const Vector& v) { return a_.apply_transpose(a_.apply(v)); }, a_.cols());
    if (!(a_scale_ > 0.0)) throw InputError("solver: measurement operator is zero");
    d_scale_ = has_w() ? power_norm([&](const Vector& v) {
      return diff_.apply_power_transpose(diff_.apply_power(v));
    }, m()) : 1.0;

    // Scaled operator K~ = [A/a, I, -D^r/d] acting on (z~, nu, w~).
    const Index n = a_.cols();
    const Index total = n + m() + (has_w() ? m() : 0);
    const double k_norm = power_norm(
        [&](const Vector& v) {
          const Vector kv = apply_k(v.head(n), v.segment(n, m()), has_w() ? Vector(v.tail(m())) : Vector());
          Vector out(total);
          out.head(n) = apply_k_transpose_z(kv);
          out.segment(n, m()) = kv;
          if (has_w()) out.tail(m()) = -diff_.apply_power_transpose(kv) / d_scale_;
          return out;
        },
        total);
    step_ = 0.9 / (1.02 * k_norm);
  }

  template <class Gram>
  double power_norm(Gram gram, Index dim) const {
    // Deterministic start with no special alignment to the operator.
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 0.7 * static_cast<double>(i));
    v.normalize();
    double lambda = 0.0;
    for (int k = 0; k < opts_.power_iterations; ++k) {
      Vector g = gram(v);
      lambda = g.norm();
      if (lambda == 0.0) return 0.0;
      v = g / lambda;
    }
    return std::sqrt(lambda);
  }

  void evaluate(const Vector& z_scaled, const Vector& nu, const Vector& w_scaled, const Vector& y,
                SolverReport& rep) {
    rep.z = z_scaled / a_scale_;
    rep.nu = nu;
    rep.w = has_w() ? Vector(w_scaled / d_scale_) : Vector();
    rep.objective = rep.z.lpNorm<1>();

    const Vector residual = a_.apply(rep.z) + nu - b_;
    if (has_w()) {
      rep.violation_main = std::max(0.0, diff_.apply_inverse_power(residual).norm() - w_radius_);
      rep.violation_nu = std::max(0.0, nu.norm() - nu_radius_);
    } else {
      rep.violation_main = std::max(0.0, (residual - nu).norm() - nu_radius_);
      rep.violation_nu = 0.0;
    }

    // Lagrange dual: g(y) = -<y,b> - nu_radius ||y|| - w_radius ||(D^r)^T y||
    // on ||A^T y||_inf <= 1. g is positively homogeneous, so the best feasible
    // multiple of y is y / ||A^T y||_inf when g(y) > 0 and 0 otherwise.
    const double sup = norm_inf(a_.apply_transpose(y));
    double dual = -y.dot(b_) - nu_radius_ * y.norm();
    if (has_w()) dual -= w_radius_ * diff_.apply_power_transpose(y).norm();
    rep.dual_bound = (dual > 0.0 && sup > 0.0) ? dual / sup : 0.0;
    rep.gap = std::abs(rep.objective - rep.dual_bound);
  }

  MeasurementOperator& a_;
  DifferenceOperator diff_;
  Vector b_;
  double nu_radius_;
  double w_radius_;
  SolverOptions opts_;
  double a_scale_ = 1.0;
  double d_scale_ = 1.0;
  double step_ = 1.0;
};

}  // namespace qcs
