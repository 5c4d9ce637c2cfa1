#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include <lpqlab/ensembles.hpp>

using namespace lpqlab;

namespace {

MeanSe mean_of_square_first_coord_ball(int n, int draws) {
  // Rejection sampling from the cube: independent of the library sampler.
  std::mt19937_64 gen(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> sq;
  std::vector<double> x(static_cast<std::size_t>(n));
  while (static_cast<int>(sq.size()) < draws) {
    double r2 = 0;
    for (auto& v : x) {
      v = u(gen);
      r2 += v * v;
    }
    if (r2 <= 1.0) sq.push_back(x[0] * x[0]);
  }
  return mean_se(sq);
}

MeanSe mean_of_square_first_coord_l1ball(int n, int draws) {
  std::mt19937_64 gen(4321);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> sq;
  std::vector<double> x(static_cast<std::size_t>(n));
  while (static_cast<int>(sq.size()) < draws) {
    double r1 = 0;
    for (auto& v : x) {
      v = u(gen);
      r1 += std::abs(v);
    }
    if (r1 <= 1.0) sq.push_back(x[0] * x[0]);
  }
  return mean_se(sq);
}

// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

std::vector<double> entry_draws(const EnsembleSpec& spec, std::uint64_t seed, std::size_t count,
                                double sign) {
  std::vector<double> out;
  for (std::size_t t = 0; t < count; ++t) {
    Stream rng = derive_substream(seed, t);
    out.push_back(sign * sample_structured_matrix(spec, rng)(0, 1));
  }
  return out;
}

}  // namespace

TEST(Family, NamesRoundTrip) {
  for (Family f : kAllFamilies) EXPECT_EQ(parse_family(family_name(f)), f);
  EXPECT_THROW(parse_family("cauchy"), DomainError);
}

TEST(IsotropicScale, ClosedForms) {
  EXPECT_NEAR(isotropic_scale(Family::cube_uniform, 7), std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(isotropic_scale(Family::laplace, 2), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(isotropic_scale(Family::ball_uniform, 3), std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(isotropic_scale(Family::l1ball_uniform, 2), std::sqrt(6.0), 1e-15);
  EXPECT_THROW(isotropic_scale(Family::beta_regular, 2), DomainError);
}

TEST(IsotropicScale, BallSecondMomentOracle) {
  const int n = 3;
  const MeanSe m = mean_of_square_first_coord_ball(n, 1000000);
  EXPECT_NEAR(m.mean, 1.0 / (n + 2), 3 * m.se);
  const double s = isotropic_scale(Family::ball_uniform, n);
  EXPECT_NEAR(s * s * m.mean, 1.0, 3 * s * s * m.se);
}

TEST(IsotropicScale, L1BallSecondMomentOracle) {
  const int n = 2;
  const MeanSe m = mean_of_square_first_coord_l1ball(n, 1000000);
  EXPECT_NEAR(m.mean, 2.0 / ((n + 1) * (n + 2)), 3 * m.se);
}

TEST(SampleRow, GaussianMomentsMatchDefinition) {
  const auto spec = EnsembleSpec::log_concave(Family::gaussian, CoeffMatrix::ones(1, 4));
  const std::size_t T = 100000;
  const auto est = estimate_covariance(spec, T, 5);
  for (Eigen::Index j = 0; j < 4; ++j) {
    EXPECT_NEAR(est.mean(j), 0.0, 3.0 / std::sqrt(double(T)));
    // Var of a sample variance of N(0,1) is 2/T.
    EXPECT_NEAR(est.covariance(j, j), 1.0, 3.0 * std::sqrt(2.0 / T));
  }
}

TEST(SampleRow, BallCovarianceIsIdentity) {
  const auto spec = EnsembleSpec::log_concave(Family::ball_uniform, CoeffMatrix::ones(1, 5));
  EXPECT_LE(estimate_covariance(spec, 1000000, 6).max_deviation, 0.02);
}

TEST(SampleRow, L1BallSupport) {
  const auto spec = EnsembleSpec::log_concave(Family::l1ball_uniform, CoeffMatrix::ones(1, 3));
  const double bound = isotropic_scale(Family::l1ball_uniform, 3);
  for (std::size_t t = 0; t < 20000; ++t) {
    Stream rng = derive_substream(9, t);
    EXPECT_LE(sample_row(spec, rng).lpNorm<1>(), bound);
  }
}

TEST(SampleRow, BallAndCubeSupport) {
  const auto ball = EnsembleSpec::log_concave(Family::ball_uniform, CoeffMatrix::ones(1, 6));
  const auto cube = EnsembleSpec::log_concave(Family::cube_uniform, CoeffMatrix::ones(1, 6));
  for (std::size_t t = 0; t < 5000; ++t) {
    Stream r1 = derive_substream(10, t);
    Stream r2 = derive_substream(11, t);
    EXPECT_LE(sample_row(ball, r1).norm(), isotropic_scale(Family::ball_uniform, 6));
    EXPECT_LE(sample_row(cube, r2).lpNorm<Eigen::Infinity>(), std::sqrt(3.0));
  }
}

TEST(SampleRow, RejectsNonLogConcave) {
  const auto spec = EnsembleSpec::beta_regular(CoeffMatrix::ones(1, 2), 1.0);
  Stream rng(0, 0);
  EXPECT_THROW(sample_row(spec, rng), DomainError);
}

TEST(Isotropy, EveryLogConcaveFamily) {
  const std::size_t T = 100000;
  for (Family f : kLogConcaveFamilies) {
    for (Eigen::Index n : {2, 8, 32}) {
      const auto spec = EnsembleSpec::log_concave(f, CoeffMatrix::ones(1, n));
      const auto est = estimate_covariance(spec, T, 100 + static_cast<std::uint64_t>(n));
      EXPECT_LE(est.max_deviation, 0.08) << family_name(f) << " n=" << n;
      for (Eigen::Index j = 0; j < n; ++j) {
        EXPECT_LE(std::abs(est.mean(j)), 3 * est.mean_se(j) + 1e-12) << family_name(f) << " n=" << n;
      }
    }
  }
}

TEST(Covariance, SmallCases) {
  const auto g = EnsembleSpec::log_concave(Family::gaussian, CoeffMatrix::ones(1, 2));
  EXPECT_LE(estimate_covariance(g, 100000, 1).max_deviation, 0.05);
  const auto b = EnsembleSpec::log_concave(Family::ball_uniform, CoeffMatrix::ones(1, 8));
  EXPECT_LE(estimate_covariance(b, 100000, 2).max_deviation, 0.05);
  const auto c = EnsembleSpec::log_concave(Family::cube_uniform, CoeffMatrix::ones(1, 1));
  EXPECT_NEAR(estimate_covariance(c, 10000, 3).covariance(0, 0), 1.0, 0.05);
  EXPECT_THROW(estimate_covariance(c, 1, 3), DomainError);
}

TEST(StructuredMatrix, ZeroCoefficientsAnnihilate) {
  for (Family f : kLogConcaveFamilies) {
    const auto spec = EnsembleSpec::log_concave(f, CoeffMatrix::zeros(3, 4));
    Stream rng(1, 2);
    EXPECT_EQ(sample_structured_matrix(spec, rng), Matrix::Zero(3, 4));
  }
  Stream rng(1, 3);
  EXPECT_EQ(sample_structured_matrix(EnsembleSpec::mixture(CoeffMatrix::zeros(2, 2), 1.0), rng),
            Matrix::Zero(2, 2));
  EXPECT_EQ(sample_structured_matrix(EnsembleSpec::beta_regular(CoeffMatrix::zeros(2, 2), 1.0), rng),
            Matrix::Zero(2, 2));
}

TEST(StructuredMatrix, IdentityMasksOffDiagonal) {
  const auto spec = EnsembleSpec::log_concave(Family::gaussian, CoeffMatrix::identity(3));
  std::vector<double> diag;
  for (std::size_t t = 0; t < 100000; ++t) {
    Stream rng = derive_substream(4, t);
    const Matrix x = sample_structured_matrix(spec, rng);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j) ASSERT_EQ(x(i, j), 0.0);
      }
    }
    diag.push_back(x(1, 1) * x(1, 1));
  }
  const MeanSe v = mean_se(diag);
  EXPECT_NEAR(v.mean, 1.0, 3 * v.se);
}

TEST(StructuredMatrix, BetaRegularHalfIsGaussianAbsMoment) {
  EXPECT_NEAR(beta_regular_constant(0.5), 1.0, 1e-14);
  const auto spec = EnsembleSpec::beta_regular(CoeffMatrix::ones(2, 2), 0.5);
  std::vector<double> absval;
  for (std::size_t t = 0; t < 50000; ++t) {
    Stream rng = derive_substream(12, t);
    absval.push_back(std::abs(sample_structured_matrix(spec, rng)(0, 0)));
  }
  const MeanSe m = mean_se(absval);
  EXPECT_NEAR(m.mean, std::sqrt(2.0 / std::numbers::pi), 3 * m.se);
}

TEST(StructuredMatrix, BetaRegularIsUnitVariance) {
  for (double beta : {0.5, 1.0, 1.5}) {
    const auto spec = EnsembleSpec::beta_regular(CoeffMatrix::ones(1, 1), beta);
    std::vector<double> sq;
    for (std::size_t t = 0; t < 200000; ++t) {
      Stream rng = derive_substream(13, t);
      const double y = sample_structured_matrix(spec, rng)(0, 0);
      sq.push_back(y * y);
    }
    const MeanSe m = mean_se(sq);
    EXPECT_NEAR(m.mean, 1.0, 4 * m.se) << "beta=" << beta;
  }
}

TEST(GaussianAbsMoment, ClosedForm) {
  EXPECT_NEAR(gaussian_abs_moment(1), std::sqrt(2 / std::numbers::pi), 1e-14);
  EXPECT_NEAR(gaussian_abs_moment(2), 1.0, 1e-14);
  EXPECT_NEAR(gaussian_abs_moment(4), 3.0, 1e-13);
  EXPECT_NEAR(gaussian_abs_moment(6), 15.0, 1e-12);
}

TEST(Reproducibility, SameSeedSameBatch) {
  for (Family f : kLogConcaveFamilies) {
    const SampleBatch batch{EnsembleSpec::log_concave(f, CoeffMatrix::ones(5, 7)), 4, 77};
    for (std::size_t t = 0; t < batch.trials; ++t) EXPECT_EQ(batch.draw(t), batch.draw(t));
  }
}

TEST(Unconditionality, SymmetricEntryLaws) {
  const std::size_t T = 10000;
  const double critical = 1.628 * std::sqrt(2.0 / T);  // 1% two-sample level
  std::vector<EnsembleSpec> specs;
  for (Family f : {Family::gaussian, Family::laplace, Family::cube_uniform}) {
    specs.push_back(EnsembleSpec::log_concave(f, CoeffMatrix::ones(2, 3)));
  }
  specs.push_back(EnsembleSpec::beta_regular(CoeffMatrix::ones(2, 3), 1.0));
  specs.push_back(EnsembleSpec::unconditional(EnsembleSpec::log_concave(Family::ball_uniform, CoeffMatrix::ones(2, 3))));
  specs.push_back(EnsembleSpec::unconditional(EnsembleSpec::mixture(CoeffMatrix::ones(2, 3), 2.0, Family::l1ball_uniform)));
  for (const auto& spec : specs) {
    const auto plus = entry_draws(spec, 21, T, 1.0);
    std::vector<double> minus;
    for (std::size_t t = 0; t < T; ++t) {
      Stream rng = derive_substream(22, t);
      minus.push_back(-sample_structured_matrix(spec, rng)(0, 1));
    }
    EXPECT_LT(ks_statistic(plus, minus), critical) << spec.summary();
  }
}

TEST(Unconditionality, WrapperFlipsSigns) {
  // Same stream: the wrapped draw equals the base draw up to entrywise signs.
  const auto base = EnsembleSpec::log_concave(Family::ball_uniform, CoeffMatrix::ones(3, 3));
  const auto wrap = EnsembleSpec::unconditional(base);
  Stream r1(5, 5);
  Stream r2(5, 5);
  const Matrix a = sample_structured_matrix(base, r1);
  const Matrix b = sample_structured_matrix(wrap, r2);
  EXPECT_TRUE(a.cwiseAbs().isApprox(b.cwiseAbs(), 0.0));
}

TEST(EnsembleSpec, Validation) {
  EXPECT_THROW(EnsembleSpec::mixture(CoeffMatrix::ones(2, 2), -1.0), DomainError);
  EXPECT_THROW(EnsembleSpec::beta_regular(CoeffMatrix::ones(2, 2), 0.4), DomainError);
  EXPECT_THROW(EnsembleSpec::beta_regular(CoeffMatrix::ones(2, 2), 1.0, 0.5), DomainError);
  EXPECT_THROW(EnsembleSpec::mixture(CoeffMatrix::ones(2, 2), 1.0, Family::beta_regular), DomainError);
  const auto w = EnsembleSpec::unconditional(EnsembleSpec::log_concave(Family::gaussian, CoeffMatrix::ones(2, 2)));
  EXPECT_EQ(w.with_coeff(CoeffMatrix::ones(4, 3)).base->m(), 4);
}

TEST(EnsembleSpec, MixtureBallUsesWholeMatrix) {
  // mn-dimensional ball: the entries of Z are dependent, so rows are not independent.
  const auto spec = EnsembleSpec::mixture(CoeffMatrix::ones(3, 3), 1.0, Family::ball_uniform);
  EXPECT_FALSE(spec.rows_independent());
  EXPECT_TRUE(EnsembleSpec::mixture(CoeffMatrix::ones(3, 3), 1.0).rows_independent());
}
