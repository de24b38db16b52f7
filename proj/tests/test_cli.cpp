#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "qcs/qcs.hpp"

using namespace qcs;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::path(QCS_WORKDIR) / "cli_scratch" /
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }

  int run(const std::string& args) {
    const std::string cmd = "cd \"" + dir_.string() + "\" && \"" + QCS_CLI_PATH + "\" " + args + " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void write(const std::string& name, const std::string& body) const { std::ofstream(path(name)) << body; }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kSmallSweep =
    "N = 64\ns = 2\nm_list = 8, 16, 32, 64\nr_list = 1\nalphabet = midrise\nlevels = 3\nstep = 0.5\n"
    "mu = 0.6\ntrials = 2\nschemes = sd_eq_opt, msq_l1\nseed = 7\n";

}  // namespace

TEST_F(Cli, QuantizeExample) {
  write("y.txt", "0.5\n0.5\n0.5\n");
  ASSERT_EQ(run("quantize --input y.txt --r 1 --one-bit"), 0);
  const Vector q = read_vector_file(path("q.txt").string());
  const Vector u = read_vector_file(path("u.txt").string());
  ASSERT_EQ(q.size(), 3);
  EXPECT_EQ(q, (Vector(3) << 1, 1, -1).finished());
  EXPECT_LT((u - (Vector(3) << -0.5, -1.0, 0.5).finished()).norm(), 1e-12);
}

TEST_F(Cli, QuantizeStateMatchesLibrary) {
  Rng rng(81);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  Vector y(200);
  for (Index i = 0; i < y.size(); ++i) y(i) = u(rng);
  write_vector_file(path("y.txt").string(), y);
  ASSERT_EQ(run("quantize --input y.txt --r 2 --levels 3 --step 0.5"), 0);
  const SigmaDeltaRun ref = sigma_delta(y, 2, Alphabet::midrise(3, 0.5));
  EXPECT_EQ(read_vector_file(path("q.txt").string()), ref.q);
  EXPECT_LT((read_vector_file(path("u.txt").string()) - ref.u).norm(), 1e-12);
  EXPECT_NE(read("stdout.txt").find("stable"), std::string::npos);
}

TEST_F(Cli, MsqIsAFixedPointOnTheAlphabet) {
  write("y.txt", "0.25\n-0.75\n0.7\n");
  ASSERT_EQ(run("quantize --input y.txt --msq --levels 2 --step 0.5 --out-q q1.txt"), 0);
  ASSERT_EQ(run("quantize --input q1.txt --msq --levels 2 --step 0.5 --out-q q2.txt"), 0);
  EXPECT_EQ(read("q1.txt"), read("q2.txt"));
  EXPECT_EQ(read_vector_file(path("q1.txt").string()), (Vector(3) << 0.25, -0.75, 0.75).finished());
}

TEST_F(Cli, QuantizeRejectsBadInput) {
  write("empty.txt", "");
  EXPECT_EQ(run("quantize --input empty.txt --one-bit"), 2);
  write("bad.txt", "0.1\nabc\n");
  EXPECT_EQ(run("quantize --input bad.txt --one-bit"), 2);
  write("y.txt", "0.1\n");
  EXPECT_EQ(run("quantize --input missing.txt --one-bit"), 2);
  EXPECT_EQ(run("quantize --input y.txt"), 2);
  EXPECT_EQ(run("quantize --input y.txt --one-bit --r 0"), 2);
  EXPECT_EQ(run("quantize --input y.txt --one-bit --levels 2 --step 0.5"), 2);
}

TEST_F(Cli, DecodeFromFiles) {
  Rng rng(82);
  const MeasurementEnsemble ens = draw_ensemble(16, 12, GeneratorKind::gaussian, rng);
  Vector x = Vector::Zero(16);
  x(3) = 0.5;
  x(11) = -0.3;
  const Vector y = measure(ens, x);
  const SigmaDeltaRun sd = sigma_delta(y / (2.0 * norm_inf(y)), 1, Alphabet::midrise(14, 0.05));
  ASSERT_TRUE(sd.stable);
  write_vector_file(path("q.txt").string(), sd.q);
  write_vector_file(path("xi.txt").string(), ens.xi);
  {
    std::ofstream om(path("omega.txt"));
    for (Index k : ens.omega) om << k + 1 << "\n";
  }
  ASSERT_EQ(run("decode --q q.txt --xi xi.txt --omega omega.txt --r 1 --gamma 0.025 --out xhat.txt"), 0);
  const Vector xhat = read_vector_file(path("xhat.txt").string());
  ASSERT_EQ(xhat.size(), 16);
  EXPECT_LE(xhat.lpNorm<1>(), (x / (2.0 * norm_inf(y))).lpNorm<1>() + 1e-6);
  EXPECT_NE(read("stdout.txt").find("converged"), std::string::npos);
}

TEST_F(Cli, DecodeRejectsMismatchedInput) {
  write("xi.txt", "1\n0\n0\n0\n");
  write("omega.txt", "1\n3\n");
  write("q3.txt", "1\n-1\n1\n");
  EXPECT_EQ(run("decode --q q3.txt --xi xi.txt --omega omega.txt --gamma 0.5"), 2);
  write("q2.txt", "1\n-1\n");
  write("omega0.txt", "0\n2\n");
  EXPECT_EQ(run("decode --q q2.txt --xi xi.txt --omega omega0.txt --gamma 0.5"), 2);
  write("omega_dup.txt", "2\n2\n");
  EXPECT_EQ(run("decode --q q2.txt --xi xi.txt --omega omega_dup.txt --gamma 0.5"), 2);
  EXPECT_EQ(run("decode --q q2.txt --xi xi.txt --omega omega.txt --gamma 0"), 2);
  EXPECT_EQ(run("decode --q q2.txt --xi xi.txt --omega omega.txt"), 2);
}

TEST_F(Cli, RipcheckReportsThreeChecks) {
  ASSERT_LE(run("ripcheck --N 16 --m 8 --s 2 --ell 4 --trials 2000 --seed 3 --out checks.jsonl"), 1);
  std::istringstream in(read("checks.jsonl"));
  std::string line;
  std::vector<nlohmann::json> recs;
  while (std::getline(in, line)) recs.push_back(nlohmann::json::parse(line));
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[0]["check"], "expectation_check");
  EXPECT_NEAR(recs[0]["bound"].get<double>(), 1.0 / 15.0, 1e-15);
  EXPECT_EQ(recs[0]["params"]["ell"], 4);
  EXPECT_TRUE(recs[0]["pass"].get<bool>());
  EXPECT_EQ(recs[1]["check"], "bounded_difference_check");
  EXPECT_TRUE(recs[1]["pass"].get<bool>());
  EXPECT_EQ(recs[2]["check"], "rip_monte_carlo");
  EXPECT_TRUE(recs[2]["params"]["exhaustive"].get<bool>());
  EXPECT_EQ(recs[2]["params"]["supports"], 120);
}

TEST_F(Cli, RipcheckSingleSparsityHasZeroBound) {
  ASSERT_LE(run("ripcheck --N 16 --m 8 --s 1 --trials 500 --out checks.jsonl"), 1);
  std::istringstream in(read("checks.jsonl"));
  std::string line;
  std::getline(in, line);
  const auto rec = nlohmann::json::parse(line);
  EXPECT_EQ(rec["bound"].get<double>(), 0.0);
  EXPECT_TRUE(rec["pass"].get<bool>());
}

TEST_F(Cli, RipcheckRejectsBadParameters) {
  EXPECT_EQ(run("ripcheck --trials 0"), 2);
  EXPECT_EQ(run("ripcheck --N 8 --m 9"), 2);
  EXPECT_EQ(run("ripcheck --alpha 0.5"), 2);
  EXPECT_EQ(run("ripcheck --m 8 --ell 9"), 2);
  EXPECT_EQ(run("ripcheck --s 0"), 2);
}

TEST_F(Cli, SweepWritesDeterministicOutputs) {
  write("small.cfg", kSmallSweep);
  ASSERT_EQ(run("sweep --config small.cfg --out a --no-timing"), 0);
  ASSERT_EQ(run("sweep --config small.cfg --out b --no-timing --threads 2"), 0);
  for (const char* f : {"records.csv", "summary.csv", "slopes.csv"}) {
    EXPECT_FALSE(read(std::string("a/") + f).empty()) << f;
    EXPECT_EQ(read(std::string("a/") + f), read(std::string("b/") + f)) << f;
  }
  EXPECT_EQ(read("a/records.csv").substr(0, 6), "scheme");
  EXPECT_EQ(read("a/summary.csv").rfind("scheme,r,m,median_err,q25,q75,n_ok\n", 0), 0u);
  EXPECT_EQ(read("a/slopes.csv").rfind("scheme,r,slope,intercept,r2\n", 0), 0u);
  std::istringstream rec(read("a/records.csv"));
  std::string line;
  int rows = -1;
  while (std::getline(rec, line)) ++rows;
  EXPECT_EQ(rows, 2 * 4 * 2);
  ASSERT_EQ(run("sweep --config small.cfg --out c --no-timing --seed 8"), 0);
  EXPECT_NE(read("a/records.csv"), read("c/records.csv"));
}

TEST_F(Cli, SabotagedSweepFailsAssert) {
  const std::string cfg =
      "N = 256\ns = 2\nm_list = 32, 64, 128, 256\nr_list = 1, 2\nalphabet = midrise\nlevels = 3\nstep = 0.5\n"
      "mu = 0.6\ntrials = 4\nschemes = sd_eq_opt, msq_l1\nseed = 11\n";
  write("clean.cfg", cfg);
  EXPECT_EQ(run("sweep --config clean.cfg --out c --no-timing --assert"), 0);
  EXPECT_EQ(read("stdout.txt").find("FAIL"), std::string::npos);
  write("sab.cfg", cfg + "sabotage = shuffle_q\n");
  EXPECT_EQ(run("sweep --config sab.cfg --out s --no-timing --assert"), 1);
  EXPECT_NE(read("stdout.txt").find("FAIL sd_eq_opt r=2 slope"), std::string::npos);
}

TEST_F(Cli, SweepRejectsBadConfig) {
  write("unknown.cfg", std::string(kSmallSweep) + "colour = blue\n");
  EXPECT_EQ(run("sweep --config unknown.cfg --out u"), 2);
  write("narrow.cfg", "N = 64\ns = 2\nm_list = 16, 32\nr_list = 1\ntrials = 1\n");
  EXPECT_EQ(run("sweep --config narrow.cfg --out n"), 2);
  write("zero.cfg", std::string(kSmallSweep) + "trials = 0\n");
  EXPECT_EQ(run("sweep --config zero.cfg --out z"), 2);
  EXPECT_EQ(run("sweep --config absent.cfg"), 2);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("quantize --input"), 2);
}
