// qcs: quantize, decode, ripcheck and sweep subcommands.
//
// Exit codes: 0 success, 1 failed check (ripcheck, sweep --assert),
// 2 usage or input error.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "qcs/qcs.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kInputError = 2;

struct QuantizeArgs {
  std::string input;
  int r = 1;
  bool one_bit = false;
  int levels = 0;
  double step = 0.0;
  bool msq = false;
  std::string out_q = "q.txt";
  std::string out_u = "u.txt";
};

qcs::Alphabet alphabet_from(bool one_bit, int levels, double step) {
  if (one_bit) {
    qcs::require(levels == 0 && step == 0.0, "--one-bit excludes --levels/--step");
    return qcs::Alphabet::one_bit();
  }
  qcs::require(levels >= 1 && step > 0.0, "give --one-bit or both --levels and --step");
  return qcs::Alphabet::midrise(levels, step);
}

int cmd_quantize(const QuantizeArgs& a) {
  const qcs::Alphabet alph = alphabet_from(a.one_bit, a.levels, a.step);
  const qcs::Vector y = qcs::read_vector_file(a.input);
  if (a.msq) {
    const qcs::Vector q = qcs::msq(y, alph);
    qcs::write_vector_file(a.out_q, q);
    std::cout << "msq " << alph.describe() << " max|y-q| " << qcs::format_double(qcs::norm_inf(y - q)) << "\n";
    return kOk;
  }
  qcs::require(a.r >= 1, "--r must be >= 1");
  const qcs::SigmaDeltaRun run = qcs::sigma_delta(y, a.r, alph);
  qcs::write_vector_file(a.out_q, run.q);
  qcs::write_vector_file(a.out_u, run.u);
  std::cout << "sigma_delta r=" << a.r << " " << alph.describe() << " ||u||_inf "
            << qcs::format_double(qcs::norm_inf(run.u)) << " bound " << qcs::format_double(run.stability_bound)
            << (run.stable ? " stable" : " unstable") << "\n";
  return kOk;
}

struct DecodeArgs {
  std::string q, xi, omega;
  int r = 1;
  double gamma = 0.0;
  double eps = 0.0;
  std::string out = "xhat.txt";
  int max_iterations = 50000;
};

int cmd_decode(const DecodeArgs& a) {
  qcs::DecodeProblem prob;
  prob.ens.xi = qcs::read_vector_file(a.xi);
  prob.ens.omega = qcs::read_index_file(a.omega);
  prob.ens.validate();
  prob.q = qcs::read_vector_file(a.q);
  qcs::require(prob.q.size() == prob.ens.m(), "q has " + std::to_string(prob.q.size()) + " entries but omega has " +
                                                  std::to_string(prob.ens.m()));
  prob.r = a.r;
  prob.gamma_r = a.gamma;
  prob.eps = a.eps;
  prob.solver.max_iterations = a.max_iterations;
  const qcs::DecodeResult res = qcs::decode_sd(prob);
  qcs::write_vector_file(a.out, res.xhat);
  std::cout << "objective " << qcs::format_double(res.objective) << " residual_quant "
            << qcs::format_double(res.residual_quant) << " residual_noise " << qcs::format_double(res.residual_noise)
            << " gap " << qcs::format_double(res.gap) << " iterations " << res.iterations
            << (res.converged ? " converged" : " not_converged") << "\n";
  return res.converged ? kOk : kCheckFailed;
}

struct RipArgs {
  qcs::Index N = 16, m = 8, s = 2;
  double alpha = 0.25;
  int r = 1;
  qcs::Index ell = 0;
  qcs::Index trials = 1000;
  std::uint64_t seed = 1;
  double rip_threshold = 1.0 / 3.0;
  std::string out;
};

qcs::Vector random_unit_sparse(qcs::Index n, qcs::Index s, qcs::Rng& rng) {
  qcs::Vector x = qcs::Vector::Zero(n);
  std::normal_distribution<double> g(0.0, 1.0);
  for (qcs::Index k : qcs::sample_omega(n, s, rng)) x(k) = g(rng);
  return x / x.norm();
}

int cmd_ripcheck(const RipArgs& a) {
  qcs::require(a.trials >= 1, "--trials must be positive");
  const qcs::CompositeSpec spec{a.N, a.m, a.s, a.alpha, a.r, a.ell};
  spec.validate();
  const qcs::DifferenceSystem diff = qcs::build_difference_system(a.r, a.m);
  const nlohmann::json params{{"N", a.N}, {"m", a.m}, {"s", a.s}, {"alpha", a.alpha}, {"r", a.r},
                              {"ell", spec.ell()}, {"trials", a.trials}, {"seed", a.seed}};

  std::vector<nlohmann::json> lines;
  {
    qcs::Rng rng(qcs::derive_seed(a.seed, {1}));
    const qcs::Vector x = random_unit_sparse(a.N, a.s, rng);
    const qcs::ExpectationCheck ec = qcs::expectation_check(x, spec, diff, a.trials, rng);
    const double allowed = ec.bound + 3.0 / std::sqrt(static_cast<double>(a.trials));
    nlohmann::json p = params;
    p["slack"] = allowed - ec.bound;
    lines.push_back(qcs::report_record("expectation_check", p, ec.deviation, ec.bound, ec.deviation <= allowed));
  }
  {
    qcs::Rng rng(qcs::derive_seed(a.seed, {2}));
    const qcs::Vector x = random_unit_sparse(a.N, a.s, rng);
    const qcs::Vector y = random_unit_sparse(a.N, a.s, rng);
    const qcs::BoundedDifferenceCheck bd = qcs::bounded_difference_check(x, y, spec, diff, a.trials, rng);
    nlohmann::json p = params;
    p["max_ratio"] = bd.max_ratio;
    lines.push_back(qcs::report_record("bounded_difference_check", p, bd.max_difference, bd.bound, bd.holds));
  }
  {
    qcs::Rng rng(qcs::derive_seed(a.seed, {3}));
    const qcs::MeasurementEnsemble ens = qcs::draw_ensemble(a.N, a.m, qcs::GeneratorKind::gaussian, rng);
    const qcs::Matrix mat = qcs::composite_matrix(ens, diff, spec.ell());
    const qcs::RipEstimate est = qcs::rip_monte_carlo(mat, a.s, a.trials, rng);
    nlohmann::json p = params;
    p["supports"] = est.supports;
    p["exhaustive"] = est.exhaustive;
    lines.push_back(qcs::report_record("rip_monte_carlo", p, est.delta_hat, a.rip_threshold,
                                       est.delta_hat < a.rip_threshold));
  }

  std::ofstream file;
  if (!a.out.empty()) {
    file.open(a.out);
    qcs::require(static_cast<bool>(file), "cannot write '" + a.out + "'");
  }
  std::ostream& out = a.out.empty() ? std::cout : file;
  bool all = true;
  for (const auto& l : lines) {
    out << l.dump() << "\n";
    all = all && l["pass"].get<bool>();
  }
  return all ? kOk : kCheckFailed;
}

struct SweepArgs {
  std::string config;
  std::string out = ".";
  int threads = 0;
  long long seed = -1;
  bool assert_verdicts = false;
  bool no_timing = false;
};

void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream f(path, std::ios::binary);
  qcs::require(static_cast<bool>(f), "cannot write '" + path.string() + "'");
  body(f);
}

int cmd_sweep(const SweepArgs& a) {
  qcs::KeyValueConfig kv = qcs::KeyValueConfig::load(a.config);
  if (a.threads > 0) kv.set("threads", std::to_string(a.threads));
  if (a.seed >= 0) kv.set("seed", std::to_string(a.seed));
  if (a.no_timing) kv.set("timing", "off");
  const qcs::ExperimentConfig cfg = qcs::config_from_kv(kv);

  const qcs::SweepResult res = qcs::sweep_and_fit(cfg);
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir);
  write_file(dir / "records.csv", [&](std::ostream& o) { qcs::write_records_csv(o, res.records); });
  write_file(dir / "summary.csv", [&](std::ostream& o) { qcs::write_summary_csv(o, res.summary); });
  write_file(dir / "slopes.csv", [&](std::ostream& o) { qcs::write_slopes_csv(o, res.slopes); });

  std::size_t excluded = 0;
  for (const auto& r : res.records) excluded += r.stable ? 0 : 1;
  std::cout << "cells " << res.records.size() << " excluded_by_preflight " << excluded << "\n";
  for (const auto& f : res.slopes)
    std::cout << "slope " << f.scheme << " r=" << f.r << " " << qcs::csv_number(f.slope) << " r2 "
              << qcs::csv_number(f.r2) << "\n";
  for (int r : cfg.r_list) {
    const bool have_sd = std::any_of(res.summary.begin(), res.summary.end(),
                                     [&](const qcs::SummaryRow& row) { return row.scheme == "sd_eq_opt" && row.r == r; });
    const bool have_msq = std::any_of(res.summary.begin(), res.summary.end(),
                                      [](const qcs::SummaryRow& row) { return row.scheme == "msq_l1"; });
    if (!have_sd || !have_msq) continue;
    const qcs::MsqComparison cmp = qcs::compare_msq_floor(res, r);
    for (const auto& row : cmp.rows)
      std::cout << "msq_vs_sd r=" << r << " m=" << row.m << " sd " << qcs::csv_number(row.sd_median) << " msq "
                << qcs::csv_number(row.msq_median) << " ratio " << qcs::csv_number(row.ratio) << "\n";
  }
  bool all = true;
  for (const auto& v : qcs::sweep_verdicts(cfg, res)) {
    std::cout << (v.pass ? "PASS " : "FAIL ") << v.name << " value " << qcs::csv_number(v.value) << " threshold "
              << qcs::csv_number(v.threshold) << "\n";
    all = all && v.pass;
  }
  return (a.assert_verdicts && !all) ? kCheckFailed : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sigma-Delta quantized compressed sensing with partial circulant matrices"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  auto* quant = app.add_subcommand("quantize", "Sigma-Delta or MSQ quantization of a vector file");
  quant->add_option("--input", qa.input, "newline-delimited input vector")->required();
  quant->add_option("--r", qa.r, "Sigma-Delta order");
  quant->add_flag("--one-bit", qa.one_bit, "use the alphabet {-1, +1}");
  quant->add_option("--levels", qa.levels, "mid-rise levels per sign");
  quant->add_option("--step", qa.step, "mid-rise step");
  quant->add_flag("--msq", qa.msq, "memoryless scalar quantization instead of Sigma-Delta");
  quant->add_option("--out-q", qa.out_q, "output file for q");
  quant->add_option("--out-u", qa.out_u, "output file for the state u");

  DecodeArgs da;
  auto* dec = app.add_subcommand("decode", "quantization-aware l1 decoding");
  dec->add_option("--q", da.q, "quantized measurements")->required();
  dec->add_option("--xi", da.xi, "circulant generator")->required();
  dec->add_option("--omega", da.omega, "selected rows, 1-based")->required();
  dec->add_option("--r", da.r, "Sigma-Delta order");
  dec->add_option("--gamma", da.gamma, "state bound, typically step/2")->required();
  dec->add_option("--eps", da.eps, "noise bound");
  dec->add_option("--out", da.out, "output file for xhat");
  dec->add_option("--max-iterations", da.max_iterations, "solver iteration cap");

  RipArgs ra;
  auto* rip = app.add_subcommand("ripcheck", "expectation, bounded-difference and RIP checks (JSON lines)");
  rip->add_option("--N", ra.N, "signal length");
  rip->add_option("--m", ra.m, "measurements");
  rip->add_option("--s", ra.s, "sparsity");
  rip->add_option("--alpha", ra.alpha, "ell exponent");
  rip->add_option("--r", ra.r, "Sigma-Delta order");
  rip->add_option("--ell", ra.ell, "fix ell instead of round(m (s/m)^alpha)");
  rip->add_option("--trials", ra.trials, "draws per check");
  rip->add_option("--seed", ra.seed, "master seed");
  rip->add_option("--rip-threshold", ra.rip_threshold, "pass threshold for delta_hat");
  rip->add_option("--out", ra.out, "output file (default stdout)");

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "m-sweep with slope fits and the MSQ comparison");
  sweep->add_option("--config", sa.config, "key = value config file")->required();
  sweep->add_option("--out", sa.out, "output directory");
  sweep->add_option("--threads", sa.threads, "worker threads (1 is the reference mode)");
  sweep->add_option("--seed", sa.seed, "override the config seed");
  sweep->add_flag("--assert", sa.assert_verdicts, "exit 1 when a slope or ordering verdict fails");
  sweep->add_flag("--no-timing", sa.no_timing, "write wall_ms as 0 for byte-identical reruns");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (quant->parsed()) return cmd_quantize(qa);
    if (dec->parsed()) return cmd_decode(da);
    if (rip->parsed()) return cmd_ripcheck(ra);
    if (sweep->parsed()) return cmd_sweep(sa);
  } catch (const qcs::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
