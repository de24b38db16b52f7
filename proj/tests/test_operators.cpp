#include <gtest/gtest.h>

#include <map>

#include "qcs/operators.hpp"

using namespace qcs;

namespace {

Vector random_vector(Index n, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

double rel_diff(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

}  // namespace

TEST(Circulant, IdentityGenerator) {
  const Vector out = apply_circulant(vec({1, 0, 0}), vec({4, 5, 6}));
  EXPECT_EQ(out, vec({4, 5, 6}));
}

TEST(Circulant, FirstColumnIsGenerator) {
  // C_xi e_1 = xi under the convolution convention C(i,j) = xi((i-j) mod N).
  const Vector xi = vec({1, 2, 3});
  EXPECT_EQ(apply_circulant(xi, vec({1, 0, 0})), xi);
  EXPECT_EQ(circulant_matrix(xi), (Matrix(3, 3) << 1, 3, 2, 2, 1, 3, 3, 2, 1).finished());
}

TEST(Circulant, Commutes) {
  Rng rng(11);
  for (Index n : {4, 17, 64, 65, 200}) {
    for (int t = 0; t < 100; ++t) {
      const Vector a = random_vector(n, rng), b = random_vector(n, rng);
      EXPECT_LT(rel_diff(apply_circulant(a, b), apply_circulant(b, a)), 1e-9);
    }
  }
}

TEST(Circulant, FftMatchesDirect) {
  Rng rng(12);
  for (Index n = 3; n <= 256; n += 7) {
    const Vector xi = random_vector(n, rng), x = random_vector(n, rng);
    const Vector direct = apply_circulant_direct(xi, x);
    EXPECT_LT((apply_circulant_fft(xi, x) - direct).norm() / direct.norm(), 1e-9) << "N=" << n;
    EXPECT_LT((circulant_matrix(xi) * x - direct).norm() / direct.norm(), 1e-12);
  }
}

TEST(Circulant, TransposeIsAdjoint) {
  Rng rng(13);
  for (Index n : {5, 64, 100}) {
    const Vector xi = random_vector(n, rng), x = random_vector(n, rng), y = random_vector(n, rng);
    EXPECT_NEAR(apply_circulant(xi, x).dot(y), x.dot(apply_circulant_transpose(xi, y)), 1e-9 * n);
  }
}

TEST(Subsample, SelectsOneBasedExample) {
  // (3,1) in 1-based indexing.
  EXPECT_EQ(subsample(vec({10, 20, 30, 40}), {2, 0}), vec({30, 10}));
}

TEST(Subsample, FullSelectionIsIdentity) {
  const Vector v = vec({1.5, -2, 7});
  EXPECT_EQ(subsample(v, {0, 1, 2}), v);
}

TEST(Subsample, RejectsRepeatsAndOutOfRange) {
  const Vector v = vec({1, 2, 3, 4});
  EXPECT_THROW(subsample(v, {1, 1}), InputError);
  EXPECT_THROW(subsample(v, {4}), InputError);
  EXPECT_THROW(subsample(v, {-1}), InputError);
}

TEST(SampleOmega, FullDrawIsPermutation) {
  Rng rng(3);
  IndexList om = sample_omega(3, 3, rng);
  std::sort(om.begin(), om.end());
  EXPECT_EQ(om, (IndexList{0, 1, 2}));
}

TEST(SampleOmega, DeterministicAndDistinct) {
  Rng a(99), b(99);
  const IndexList x = sample_omega(6, 3, a), y = sample_omega(6, 3, b);
  EXPECT_EQ(x, y);
  EXPECT_NO_THROW(validate_omega(x, 6));
  EXPECT_THROW(sample_omega(3, 4, a), InputError);
}

TEST(SampleOmega, FirstCoordinateUniform) {
  // Chi-square with 7 degrees of freedom; 24.32 is the 0.999 quantile.
  Rng rng(2024);
  std::vector<int> counts(8, 0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) ++counts[static_cast<std::size_t>(sample_omega(8, 3, rng)[0])];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / 8.0) * (c - draws / 8.0) / (draws / 8.0);
  EXPECT_LT(chi2, 24.32);
}

TEST(Measure, IdentityEnsemble) {
  const MeasurementEnsemble ens = make_ensemble(vec({1, 0, 0, 0}), {0, 1, 2, 3});
  const Vector x = vec({3, -1, 4, 1});
  EXPECT_EQ(measure(ens, x), x);
}

TEST(Measure, IdentityThenSelection) {
  const MeasurementEnsemble ens = make_ensemble(vec({1, 0, 0, 0}), {1, 3});
  EXPECT_EQ(measure(ens, vec({5, 6, 7, 8})), vec({6, 8}));
}

TEST(Measure, MatchesDenseMatrix) {
  Rng rng(21);
  for (int t = 0; t < 50; ++t) {
    const Index n = 8 + 5 * t;
    const MeasurementEnsemble ens =
        draw_ensemble(n, n / 2, t % 2 ? GeneratorKind::rademacher : GeneratorKind::gaussian, rng);
    const Vector x = random_vector(n, rng);
    const Vector dense = measurement_matrix(ens) * x;
    EXPECT_LT((measure(ens, x) - dense).norm() / dense.norm(), 1e-9);
    MeasurementOperator op(ens);
    EXPECT_LT((op.apply(x) - dense).norm() / dense.norm(), 1e-9);
    const Vector y = random_vector(n / 2, rng);
    const Vector adj = measurement_matrix(ens).transpose() * y;
    EXPECT_LT((op.apply_transpose(y) - adj).norm() / adj.norm(), 1e-9);
  }
}

TEST(Ensemble, RejectsBadInputs) {
  EXPECT_THROW(make_ensemble(vec({1, 2}), {0, 0}), InputError);
  EXPECT_THROW(make_ensemble(vec({1, std::nan("")}), {0}), InputError);
  EXPECT_THROW(make_ensemble(vec({1, 2}), {0, 1, 2}), InputError);
  Rng rng(1);
  const Vector r = draw_generator(1000, GeneratorKind::rademacher, rng);
  EXPECT_TRUE((r.array().abs() == 1.0).all());
}

TEST(DifferenceSystem, CumulativeSumExample) {
  const DifferenceSystem d = build_difference_system(1, 3);
  EXPECT_EQ(d.DrInv * vec({1, 1, 1}), vec({1, 2, 3}));
  EXPECT_EQ(d.op().apply_inverse_power(vec({1, 1, 1})), vec({1, 2, 3}));
}

TEST(DifferenceSystem, ForwardExample) {
  const DifferenceSystem d = build_difference_system(1, 2);
  EXPECT_EQ(d.Dr.cast<double>() * vec({1, 1}), vec({1, 0}));
  EXPECT_EQ(difference_matrix(2), (Eigen::MatrixXi(2, 2) << 1, 0, -1, 1).finished());
}

TEST(DifferenceSystem, InverseAndSvd) {
  for (int r = 1; r <= 4; ++r) {
    for (Index m : {1, 5, 64, 200}) {
      if (m < r) continue;
      const DifferenceSystem d = build_difference_system(r, m);
      const Matrix dr = d.Dr.cast<double>();
      const Matrix id = Matrix::Identity(m, m);
      EXPECT_LT((dr * d.DrInv - id).cwiseAbs().maxCoeff(), 1e-10);
      Eigen::MatrixXi power = Eigen::MatrixXi::Identity(m, m);
      for (int k = 0; k < r; ++k) power = power * difference_matrix(m);
      EXPECT_EQ(d.Dr, power);
      const Matrix recon = d.U * d.S.asDiagonal() * d.V.transpose();
      EXPECT_LT((recon - d.DrInv).cwiseAbs().maxCoeff(), 1e-10 * d.DrInv.cwiseAbs().maxCoeff());
      EXPECT_LT((d.U.transpose() * d.U - id).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((d.V.transpose() * d.V - id).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_GT(d.S.minCoeff(), 0.0);
      for (Index k = 1; k < m; ++k) EXPECT_LE(d.S(k), d.S(k - 1));
    }
  }
}

TEST(DifferenceSystem, SmallCaseExact) {
  // r = 2, m = 64 against a direct inversion.
  const DifferenceSystem d = build_difference_system(2, 64);
  const Matrix inv = d.Dr.cast<double>().inverse();
  EXPECT_LT((d.Dr.cast<double>() * inv - Matrix::Identity(64, 64)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((inv - d.DrInv).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(DifferenceSystem, ReachesLargeSizes) {
  const DifferenceSystem d = build_difference_system(4, 1024);
  EXPECT_LT((d.Dr.cast<double>() * d.DrInv - Matrix::Identity(1024, 1024)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(DifferenceSystem, RejectsBadOrders) {
  EXPECT_THROW(build_difference_system(0, 4), InputError);
  EXPECT_THROW(build_difference_system(3, 2), InputError);
}

TEST(DifferenceOperator, MatchesDenseMatrices) {
  Rng rng(5);
  for (int r = 1; r <= 3; ++r) {
    const DifferenceSystem d = build_difference_system(r, 40);
    const DifferenceOperator op = d.op();
    const Vector v = random_vector(40, rng);
    const Matrix dr = d.Dr.cast<double>();
    EXPECT_LT((op.apply_power(v) - dr * v).norm(), 1e-10);
    EXPECT_LT((op.apply_inverse_power(v) - d.DrInv * v).norm(), 1e-10 * d.DrInv.norm());
    EXPECT_LT((op.apply_power_transpose(v) - dr.transpose() * v).norm(), 1e-10);
    EXPECT_LT((op.apply_inverse_power_transpose(v) - d.DrInv.transpose() * v).norm(), 1e-10 * d.DrInv.norm());
  }
}

TEST(DifferenceSystem, SingularValuesGrowLikeMOverEll) {
  // ell-th singular value of D^{-1} is within a constant of m / ell.
  const Index m = 256;
  const DifferenceSystem d = build_difference_system(1, m);
  for (Index ell : {1, 4, 16, 64, 256}) {
    const double ratio = d.S(ell - 1) / (static_cast<double>(m) / static_cast<double>(ell));
    EXPECT_GT(ratio, 0.1);
    EXPECT_LT(ratio, 1.0);
  }
}

TEST(ProjectTop, Properties) {
  Rng rng(8);
  const DifferenceSystem d = build_difference_system(2, 12);
  const Vector w = random_vector(12, rng);
  EXPECT_NEAR(project_top(d.V, 12, w).norm(), w.norm(), 1e-10);
  const Vector one = project_top(d.V, 1, w);
  ASSERT_EQ(one.size(), 1);
  EXPECT_NEAR(one(0), d.V.col(0).dot(w), 1e-12);
  for (Index ell = 1; ell <= 12; ++ell) EXPECT_LE(project_top(d.V, ell, w).norm(), w.norm() + 1e-12);
  EXPECT_THROW(project_top(d.V, 0, w), InputError);
  EXPECT_THROW(project_top(d.V, 13, w), InputError);
}

TEST(FourierSupNorm, Examples) {
  EXPECT_NEAR(fourier_sup_norm(vec({1, 0, 0, 0, 0})), 1.0, 1e-12);
  EXPECT_NEAR(fourier_sup_norm(vec({1, 1, 1, 1})), 4.0, 1e-12);
  Rng rng(17);
  for (int t = 0; t < 100; ++t) {
    const Vector x = random_vector(3 + t, rng);
    EXPECT_LE(fourier_sup_norm(x), x.lpNorm<1>() + 1e-9);
  }
}

TEST(SparseSignal, DenseAndValidation) {
  SparseSignal sig{6, {1, 4}, vec({2.0, -1.0})};
  const Vector x = sig.dense();
  EXPECT_EQ(x, vec({0, 2, 0, 0, -1, 0}));
  SparseSignal bad{6, {1, 1}, vec({2.0, -1.0})};
  EXPECT_THROW(bad.dense(), InputError);
}
