#pragma once

// End-to-end experiments: signal generation, measurement, quantization,
// decoding and error bookkeeping, m-sweeps with log-log slope fits, and the
// MSQ-versus-Sigma-Delta comparison.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qcs/config.hpp"
#include "qcs/core.hpp"
#include "qcs/decode.hpp"
#include "qcs/operators.hpp"
#include "qcs/quantize.hpp"
#include "qcs/rip.hpp"

namespace qcs {

/// Quantizer/decoder pairings a sweep can run.
enum class Scheme {
  sd_eq_opt,          // Sigma-Delta, quantization-aware l1 program
  sd_two_stage,       // Sigma-Delta, l1 support estimate + Sobolev dual
  sd_sobolev_oracle,  // Sigma-Delta, Sobolev dual on the true top-s support
  msq_l1,             // MSQ, l1 with residual ball (step/2 + eps) sqrt(m)
  raw_eq_opt,         // no quantization: q = y, gamma = 1e-9
};

inline std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::sd_eq_opt: return "sd_eq_opt";
    case Scheme::sd_two_stage: return "sd_two_stage";
    case Scheme::sd_sobolev_oracle: return "sd_sobolev_oracle";
    case Scheme::msq_l1: return "msq_l1";
    case Scheme::raw_eq_opt: return "raw_eq_opt";
  }
  return "?";
}

inline Scheme parse_scheme(const std::string& name) {
  for (Scheme s : {Scheme::sd_eq_opt, Scheme::sd_two_stage, Scheme::sd_sobolev_oracle, Scheme::msq_l1,
                   Scheme::raw_eq_opt})
    if (scheme_name(s) == name) return s;
  // Decoder names accepted as aliases.
  if (name == "eq_opt") return Scheme::sd_eq_opt;
  if (name == "two_stage") return Scheme::sd_two_stage;
  if (name == "sobolev_oracle") return Scheme::sd_sobolev_oracle;
  throw InputError("unknown scheme '" + name + "'");
}

/// Schemes whose quantizer has an order; the others run once with r = 0.
inline bool scheme_uses_order(Scheme s) { return s != Scheme::msq_l1; }

enum class SignalModel { exact_sparse, compressible };

inline constexpr double kPassThroughGamma = 1e-9;

struct ExperimentConfig {
  Index N = 256;
  Index s = 3;
  std::vector<Index> m_list{64, 128};
  std::vector<int> r_list{1, 2};
  Alphabet alphabet = Alphabet::midrise(3, 0.5);
  double mu = 0.6;
  double eps_gen = 0.0;
  double eps = 0.0;
  double alpha = 0.25;
  Index trials = 10;
  std::vector<Scheme> schemes{Scheme::sd_eq_opt, Scheme::msq_l1};
  GeneratorKind generator = GeneratorKind::gaussian;
  SignalModel signal = SignalModel::exact_sparse;
  double p = 0.5;
  std::uint64_t seed = 1;
  int threads = 1;
  bool timing = true;
  bool shuffle_q = false;  // fault injection: decoders see a permuted q
  SolverOptions solver;

  void validate() const {
    require(N >= 1, "config: N must be positive");
    require(s >= 0 && s <= N, "config: need 0 <= s <= N");
    require(!m_list.empty(), "config: m_list is empty");
    for (std::size_t i = 0; i < m_list.size(); ++i) {
      require(m_list[i] >= 1 && m_list[i] <= N, "config: every m must satisfy 1 <= m <= N");
      if (i > 0) require(m_list[i] > m_list[i - 1], "config: m_list must be increasing");
    }
    require(!r_list.empty(), "config: r_list is empty");
    for (int r : r_list) require(r >= 1 && r <= 8, "config: orders must lie in [1, 8]");
    require(mu > 0.0 && mu < 1.0, "config: mu must lie in (0, 1)");
    require(eps >= 0.0 && eps_gen >= 0.0, "config: eps must be nonnegative");
    require(eps < 1.0 - mu && eps_gen < 1.0 - mu, "config: eps must be below 1 - mu");
    require(eps_gen <= eps, "config: generated noise level exceeds the decoder bound");
    require(alpha >= 0.0 && alpha < 0.5, "config: alpha must lie in [0, 1/2)");
    require(trials >= 1, "config: trials must be positive");
    require(!schemes.empty(), "config: no schemes");
    require(p > 0.0, "config: p must be positive");
    require(threads >= 1, "config: threads must be positive");
  }
};

inline ExperimentConfig config_from_kv(const KeyValueConfig& kv) {
  static const std::vector<std::string> known{
      "N", "s", "m_list", "r_list", "alphabet", "levels", "step", "mu", "eps", "eps_gen", "alpha",
      "trials", "schemes", "generator", "signal", "p", "seed", "threads", "timing", "sabotage",
      "tol_gap", "tol_feas", "max_iterations"};
  for (const auto& k : kv.keys())
    if (std::find(known.begin(), known.end(), k) == known.end()) throw InputError("config: unknown key '" + k + "'");

  ExperimentConfig cfg;
  cfg.N = static_cast<Index>(kv.get_int("N", cfg.N));
  cfg.s = static_cast<Index>(kv.get_int("s", cfg.s));
  if (kv.has("m_list")) {
    cfg.m_list.clear();
    for (const auto& t : split_list(kv.get("m_list", ""))) cfg.m_list.push_back(static_cast<Index>(parse_integer(t, "m_list")));
  }
  if (kv.has("r_list")) {
    cfg.r_list.clear();
    for (const auto& t : split_list(kv.get("r_list", ""))) cfg.r_list.push_back(static_cast<int>(parse_integer(t, "r_list")));
  }
  const std::string alph = kv.get("alphabet", "midrise");
  if (alph == "one_bit") {
    cfg.alphabet = Alphabet::one_bit();
  } else if (alph == "midrise") {
    cfg.alphabet = Alphabet::midrise(static_cast<int>(kv.get_int("levels", 3)), kv.get_double("step", 0.5));
  } else {
    throw InputError("config: alphabet must be 'midrise' or 'one_bit'");
  }
  cfg.mu = kv.get_double("mu", cfg.mu);
  cfg.eps = kv.get_double("eps", cfg.eps);
  cfg.eps_gen = kv.get_double("eps_gen", cfg.eps);
  cfg.alpha = kv.get_double("alpha", cfg.alpha);
  cfg.trials = static_cast<Index>(kv.get_int("trials", cfg.trials));
  if (kv.has("schemes")) {
    cfg.schemes.clear();
    for (const auto& t : split_list(kv.get("schemes", ""))) cfg.schemes.push_back(parse_scheme(t));
  }
  const std::string gen = kv.get("generator", "gaussian");
  if (gen == "gaussian") cfg.generator = GeneratorKind::gaussian;
  else if (gen == "rademacher") cfg.generator = GeneratorKind::rademacher;
  else throw InputError("config: generator must be 'gaussian' or 'rademacher'");
  const std::string sig = kv.get("signal", "exact_sparse");
  if (sig == "exact_sparse") cfg.signal = SignalModel::exact_sparse;
  else if (sig == "compressible") cfg.signal = SignalModel::compressible;
  else throw InputError("config: signal must be 'exact_sparse' or 'compressible'");
  cfg.p = kv.get_double("p", cfg.p);
  const long long seed = kv.get_int("seed", 1);
  require(seed >= 0, "config: seed must be nonnegative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.threads = static_cast<int>(kv.get_int("threads", cfg.threads));
  const std::string timing = kv.get("timing", "on");
  require(timing == "on" || timing == "off", "config: timing must be 'on' or 'off'");
  cfg.timing = timing == "on";
  const std::string sabotage = kv.get("sabotage", "none");
  require(sabotage == "none" || sabotage == "shuffle_q", "config: sabotage must be 'none' or 'shuffle_q'");
  cfg.shuffle_q = sabotage == "shuffle_q";
  cfg.solver.tol_gap = kv.get_double("tol_gap", cfg.solver.tol_gap);
  cfg.solver.tol_feas = kv.get_double("tol_feas", cfg.solver.tol_feas);
  cfg.solver.max_iterations = static_cast<int>(kv.get_int("max_iterations", cfg.solver.max_iterations));
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

/// sigma_s(x)_1: l1 mass outside the s largest entries.
inline double best_s_term_error_l1(const Vector& x, Index s) {
  std::vector<double> mags(x.data(), x.data() + x.size());
  for (auto& v : mags) v = std::abs(v);
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double tail = 0.0;
  for (std::size_t i = static_cast<std::size_t>(std::min<Index>(s, x.size())); i < mags.size(); ++i) tail += mags[i];
  return tail;
}

/// Draws a signal for the configured model and rescales it so that
/// ||A x||_inf = mu.
inline Vector generate_signal(const ExperimentConfig& cfg, const MeasurementEnsemble& ens, Rng& rng) {
  require(cfg.s >= 0 && cfg.s <= cfg.N, "generate_signal: need 0 <= s <= N");
  Vector x = Vector::Zero(cfg.N);
  std::normal_distribution<double> gauss(0.0, 1.0);
  if (cfg.signal == SignalModel::exact_sparse) {
    if (cfg.s == 0) return x;
    for (Index k : sample_omega(cfg.N, cfg.s, rng)) x(k) = gauss(rng);
  } else {
    const IndexList perm = sample_omega(cfg.N, cfg.N, rng);
    std::bernoulli_distribution coin(0.5);
    for (Index j = 0; j < cfg.N; ++j) {
      const double mag = std::pow(static_cast<double>(j + 1), -1.0 / cfg.p);
      x(perm[static_cast<std::size_t>(j)]) = coin(rng) ? mag : -mag;
    }
  }
  const double peak = norm_inf(measure(ens, x));
  if (peak > 0.0) x *= cfg.mu / peak;
  return x;
}

// ---------------------------------------------------------------------------
// Cells
// ---------------------------------------------------------------------------

struct ExperimentRecord {
  std::string scheme;
  int r = 0;
  Index m = 0;
  Index ell = 0;
  Index trial = 0;
  std::uint64_t seed = 0;
  double err_l2 = 0.0;
  double rel_err = 0.0;
  double sigma_s_over_sqrt_s = 0.0;
  int iters = 0;
  bool stable = false;  // quantizer stable and true signal feasible for the decoder
  bool converged = false;
  double wall_ms = 0.0;
};

/// Seed shared by every scheme and order for a given (m, trial), so that
/// schemes are compared on identical ensembles, signals and noise.
inline std::uint64_t cell_seed(const ExperimentConfig& cfg, Index m, Index trial) {
  return derive_seed(cfg.seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(trial)});
}

struct CellInputs {
  MeasurementEnsemble ens;
  Vector x;
  Vector e;
};

inline CellInputs draw_cell_inputs(const ExperimentConfig& cfg, Index m, std::uint64_t seed) {
  Rng ens_rng(derive_seed(seed, {1}));
  Rng sig_rng(derive_seed(seed, {2}));
  Rng noise_rng(derive_seed(seed, {3}));
  CellInputs in{draw_ensemble(cfg.N, m, cfg.generator, ens_rng), Vector(), Vector(m)};
  in.x = generate_signal(cfg, in.ens, sig_rng);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (Index i = 0; i < m; ++i) in.e(i) = cfg.eps_gen * unit(noise_rng);
  return in;
}

inline ExperimentRecord run_cell(const ExperimentConfig& cfg, Scheme scheme, int r, Index m, Index trial) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentRecord rec;
  rec.scheme = scheme_name(scheme);
  rec.r = scheme_uses_order(scheme) ? r : 0;
  rec.m = m;
  rec.trial = trial;
  rec.seed = cell_seed(cfg, m, trial);
  rec.ell = CompositeSpec{cfg.N, m, std::max<Index>(cfg.s, 1), cfg.alpha, 1}.ell();

  const CellInputs in = draw_cell_inputs(cfg, m, rec.seed);
  const Vector y = measure(in.ens, in.x) + in.e;
  const double root_m = std::sqrt(static_cast<double>(m));
  const DifferenceOperator diff(std::max(rec.r, 0), m);

  // Quantize and check that the truth is feasible for the decoder.
  Vector q;
  double gamma = kPassThroughGamma;
  bool preflight = true;
  if (scheme == Scheme::msq_l1) {
    q = msq(y, cfg.alphabet);
    gamma = cfg.alphabet.step / 2;
    preflight = norm_inf(y) <= cfg.alphabet.levels * cfg.alphabet.step;
  } else if (scheme == Scheme::raw_eq_opt) {
    q = y;
  } else {
    const SigmaDeltaRun run = sigma_delta(y, r, cfg.alphabet);
    q = run.q;
    gamma = run.stability_bound;
    preflight = run.stable;
  }
  const Vector truth_residual = measure(in.ens, in.x) + in.e - q;
  if (scheme == Scheme::msq_l1) {
    preflight = preflight && (truth_residual - in.e).norm() <= (gamma + cfg.eps) * root_m * (1 + 1e-9);
  } else {
    preflight = preflight && diff.apply_inverse_power(truth_residual).norm() <= gamma * root_m * (1 + 1e-9) + 1e-12;
  }
  preflight = preflight && in.e.norm() <= cfg.eps * root_m * (1 + 1e-12) + 1e-15;

  if (cfg.shuffle_q) {
    Rng shuffle_rng(derive_seed(rec.seed, {4}));
    const IndexList perm = sample_omega(m, m, shuffle_rng);
    Vector shuffled(m);
    for (Index i = 0; i < m; ++i) shuffled(i) = q(perm[static_cast<std::size_t>(i)]);
    q = shuffled;
  }

  Vector xhat;
  rec.converged = true;
  try {
    switch (scheme) {
      case Scheme::sd_eq_opt:
      case Scheme::raw_eq_opt: {
        DecodeProblem prob{in.ens, r, q, gamma, cfg.eps, cfg.solver};
        const DecodeResult res = decode_sd(prob);
        xhat = res.xhat;
        rec.iters = res.iterations;
        rec.converged = res.converged;
        break;
      }
      case Scheme::msq_l1: {
        const DecodeResult res = decode_l1(in.ens, q, (gamma + cfg.eps) * root_m, cfg.solver);
        xhat = res.xhat;
        rec.iters = res.iterations;
        rec.converged = res.converged;
        break;
      }
      case Scheme::sd_two_stage: {
        const TwoStageResult res = two_stage_decode(in.ens, r, q, cfg.s, gamma, cfg.eps, cfg.solver);
        xhat = res.xhat;
        rec.iters = res.stage1.iterations;
        rec.converged = cfg.s == 0 || res.stage1.converged;
        break;
      }
      case Scheme::sd_sobolev_oracle:
        xhat = sobolev_dual_decode(in.ens, diff, q, top_s_support(in.x, cfg.s));
        break;
    }
  } catch (const RankDeficientError&) {
    xhat = Vector::Constant(cfg.N, std::numeric_limits<double>::quiet_NaN());
    rec.converged = false;
  }

  rec.err_l2 = (xhat - in.x).norm();
  const double xn = in.x.norm();
  rec.rel_err = xn > 0.0 ? rec.err_l2 / xn : rec.err_l2;
  rec.sigma_s_over_sqrt_s =
      cfg.s > 0 ? best_s_term_error_l1(in.x, cfg.s) / std::sqrt(static_cast<double>(cfg.s)) : in.x.lpNorm<1>();
  rec.stable = preflight;
  if (cfg.timing)
    rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct CellKey {
  Scheme scheme;
  int r;
  Index m;
  Index trial;
};

/// Cells in canonical order: scheme, order, m, trial.
inline std::vector<CellKey> enumerate_cells(const ExperimentConfig& cfg) {
  std::vector<CellKey> keys;
  for (Scheme sc : cfg.schemes) {
    const std::vector<int> orders = scheme_uses_order(sc) ? cfg.r_list : std::vector<int>{0};
    for (int r : orders)
      for (Index m : cfg.m_list)
        for (Index t = 0; t < cfg.trials; ++t) keys.push_back({sc, r, m, t});
  }
  return keys;
}

/// Runs every cell; output order is canonical regardless of thread count.
inline std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<CellKey> keys = enumerate_cells(cfg);
  std::vector<ExperimentRecord> out(keys.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < keys.size(); i = next++) {
      try {
        const CellKey& k = keys[i];
        out[i] = run_cell(cfg, k.scheme, k.r, k.m, k.trial);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(cfg.threads, static_cast<int>(keys.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double prob) {
  if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SummaryRow {
  std::string scheme;
  int r = 0;
  Index m = 0;
  double median_err = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
  Index n_ok = 0;
};

/// Median and quartiles of err_l2 per (scheme, r, m) over cells that passed
/// preflight. Rows follow first appearance in `records`.
inline std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
  std::vector<std::tuple<std::string, int, Index>> order;
  std::map<std::tuple<std::string, int, Index>, std::vector<double>> groups;
  for (const auto& rec : records) {
    const auto key = std::make_tuple(rec.scheme, rec.r, rec.m);
    if (!groups.count(key)) {
      order.push_back(key);
      groups[key];
    }
    if (rec.stable && std::isfinite(rec.err_l2)) groups[key].push_back(rec.err_l2);
  }
  std::vector<SummaryRow> rows;
  for (const auto& key : order) {
    auto errs = groups[key];
    std::sort(errs.begin(), errs.end());
    rows.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), quantile_sorted(errs, 0.5),
                    quantile_sorted(errs, 0.25), quantile_sorted(errs, 0.75), static_cast<Index>(errs.size())});
  }
  return rows;
}

struct SlopeFit {
  std::string scheme;
  int r = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least-squares line through (log m, log err) over finite positive points.
inline SlopeFit fit_loglog(const std::vector<double>& ms, const std::vector<double>& errs) {
  require(ms.size() == errs.size(), "fit_loglog: length mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < ms.size(); ++i)
    if (ms[i] > 0.0 && errs[i] > 0.0 && std::isfinite(errs[i])) {
      lx.push_back(std::log(ms[i]));
      ly.push_back(std::log(errs[i]));
    }
  require(lx.size() >= 2, "fit_loglog: fewer than two finite cells");
  const double n = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  require(sxx > 0.0, "fit_loglog: all m values coincide");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

inline std::vector<SlopeFit> fit_slopes(const std::vector<SummaryRow>& summary) {
  std::vector<std::pair<std::string, int>> order;
  std::map<std::pair<std::string, int>, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (const auto& row : summary) {
    const auto key = std::make_pair(row.scheme, row.r);
    if (!groups.count(key)) order.push_back(key);
    groups[key].first.push_back(static_cast<double>(row.m));
    groups[key].second.push_back(row.median_err);
  }
  std::vector<SlopeFit> fits;
  for (const auto& key : order) {
    SlopeFit fit = fit_loglog(groups[key].first, groups[key].second);
    fit.scheme = key.first;
    fit.r = key.second;
    fits.push_back(fit);
  }
  return fits;
}

struct SweepResult {
  std::vector<ExperimentRecord> records;
  std::vector<SummaryRow> summary;
  std::vector<SlopeFit> slopes;
};

inline SweepResult sweep_and_fit(const ExperimentConfig& cfg) {
  cfg.validate();
  require(cfg.m_list.size() >= 4, "sweep_and_fit: need at least four m values");
  require(cfg.m_list.back() >= 8 * cfg.m_list.front(), "sweep_and_fit: m values must span at least 8x");
  SweepResult out;
  out.records = run_sweep(cfg);
  out.summary = summarize(out.records);
  out.slopes = fit_slopes(out.summary);
  return out;
}

// ---------------------------------------------------------------------------
// MSQ versus Sigma-Delta
// ---------------------------------------------------------------------------

struct MsqComparisonRow {
  Index m = 0;
  double sd_median = 0.0;
  double msq_median = 0.0;
  double ratio = 0.0;
};

struct MsqComparison {
  std::string sd_scheme;
  int r = 0;
  std::vector<MsqComparisonRow> rows;
  double msq_slope = 0.0;
  bool sd_better_at_largest_m = false;
  bool ratio_decreasing = false;
};

/// Pairs the Sigma-Delta curve of the given order against the MSQ curve.
inline MsqComparison compare_msq_floor(const SweepResult& sweep, int r,
                                       const std::string& sd_scheme = "sd_eq_opt") {
  MsqComparison out;
  out.sd_scheme = sd_scheme;
  out.r = r;
  std::map<Index, double> sd, ms;
  for (const auto& row : sweep.summary) {
    if (row.scheme == sd_scheme && row.r == r) sd[row.m] = row.median_err;
    if (row.scheme == "msq_l1") ms[row.m] = row.median_err;
  }
  require(!sd.empty() && !ms.empty(), "compare_msq_floor: sweep lacks the Sigma-Delta or MSQ curve");
  for (const auto& [m, e] : sd)
    if (ms.count(m)) out.rows.push_back({m, e, ms[m], e / ms[m]});
  require(!out.rows.empty(), "compare_msq_floor: no common m values");
  out.sd_better_at_largest_m = out.rows.back().sd_median < out.rows.back().msq_median;
  out.ratio_decreasing = true;
  for (std::size_t i = 1; i < out.rows.size(); ++i)
    if (!(out.rows[i].ratio < out.rows[i - 1].ratio)) out.ratio_decreasing = false;
  for (const auto& fit : sweep.slopes)
    if (fit.scheme == "msq_l1") out.msq_slope = fit.slope;
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts and CSV output
// ---------------------------------------------------------------------------

struct Verdict {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Slope and ordering checks derived from the decay exponent alpha (r - 1/2).
inline std::vector<Verdict> sweep_verdicts(const ExperimentConfig& cfg, const SweepResult& sweep) {
  std::vector<Verdict> out;
  std::map<int, double> eq_opt_slopes;
  for (const auto& fit : sweep.slopes) {
    if (fit.scheme.rfind("sd_", 0) != 0) continue;
    const double threshold = -cfg.alpha * (fit.r - 0.5) + 0.2;
    out.push_back({fit.scheme + " r=" + std::to_string(fit.r) + " slope", fit.slope, threshold, fit.slope <= threshold});
    if (fit.scheme == "sd_eq_opt") eq_opt_slopes[fit.r] = fit.slope;
  }
  for (auto it = eq_opt_slopes.begin(); it != eq_opt_slopes.end() && std::next(it) != eq_opt_slopes.end(); ++it) {
    const auto nx = std::next(it);
    out.push_back({"sd_eq_opt slope r=" + std::to_string(nx->first) + " below r=" + std::to_string(it->first),
                   nx->second, it->second, nx->second < it->second});
  }
  const bool has_msq = std::any_of(sweep.summary.begin(), sweep.summary.end(),
                                   [](const SummaryRow& r) { return r.scheme == "msq_l1"; });
  if (has_msq) {
    for (const auto& [r, slope] : eq_opt_slopes) {
      if (r < 2) continue;
      const MsqComparison cmp = compare_msq_floor(sweep, r);
      out.push_back({"sd_eq_opt r=" + std::to_string(r) + " below msq at largest m", cmp.rows.back().sd_median,
                     cmp.rows.back().msq_median, cmp.sd_better_at_largest_m});
      out.push_back({"sd_eq_opt r=" + std::to_string(r) + "/msq ratio decreasing in m", cmp.rows.back().ratio,
                     cmp.rows.front().ratio, cmp.ratio_decreasing});
    }
  }
  return out;
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline void write_records_csv(std::ostream& out, const std::vector<ExperimentRecord>& records) {
  out << "scheme,r,m,ell,trial,seed,err_l2,rel_err,sigma_s_over_sqrt_s,iters,stable,converged,wall_ms\n";
  for (const auto& r : records) {
    out << r.scheme << ',' << r.r << ',' << r.m << ',' << r.ell << ',' << r.trial << ',' << r.seed << ','
        << csv_number(r.err_l2) << ',' << csv_number(r.rel_err) << ',' << csv_number(r.sigma_s_over_sqrt_s) << ','
        << r.iters << ',' << (r.stable ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ','
        << csv_number(std::round(r.wall_ms * 1000.0) / 1000.0) << '\n';
  }
}

inline void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "scheme,r,m,median_err,q25,q75,n_ok\n";
  for (const auto& r : rows)
    out << r.scheme << ',' << r.r << ',' << r.m << ',' << csv_number(r.median_err) << ',' << csv_number(r.q25)
        << ',' << csv_number(r.q75) << ',' << r.n_ok << '\n';
}

inline void write_slopes_csv(std::ostream& out, const std::vector<SlopeFit>& fits) {
  out << "scheme,r,slope,intercept,r2\n";
  for (const auto& f : fits)
    out << f.scheme << ',' << f.r << ',' << csv_number(f.slope) << ',' << csv_number(f.intercept) << ','
        << csv_number(f.r2) << '\n';
}

}  // namespace qcs
