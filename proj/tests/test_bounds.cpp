#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include <lpqlab/bounds.hpp>

using namespace lpqlab;

namespace {

EnsembleSpec lc(Family f, CoeffMatrix a) { return EnsembleSpec::log_concave(f, std::move(a)); }

double term(const BoundReport& r, const std::string& name) {
  for (const auto& t : r.terms) {
    if (t.name == name) return t.value;
  }
  ADD_FAILURE() << "missing term " << name;
  return 0;
}

VerifyOptions quick() {
  VerifyOptions o;
  o.mc.power.tol = 1e-8;
  return o;
}

}  // namespace

TEST(MaxEntry, ZeroCoefficients) {
  const MeanSe r = estimate_max_entry(lc(Family::gaussian, CoeffMatrix::zeros(3, 3)), 10, 1);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.se, 0.0);
}

TEST(MaxEntry, GaussianOrderStatisticScale) {
  const MeanSe r = estimate_max_entry(lc(Family::gaussian, CoeffMatrix::ones(30, 30)), 200, 2);
  const double ratio = r.mean / std::sqrt(2 * std::log(900.0));
  EXPECT_GE(ratio, 0.85);
  EXPECT_LE(ratio, 1.05);
}

TEST(MaxEntry, SingleEntryIsScaledAbsGaussian) {
  const MeanSe r = estimate_max_entry(lc(Family::gaussian, CoeffMatrix(Matrix::Constant(1, 1, 2.0))), 20000, 3);
  EXPECT_NEAR(r.mean, 2 * std::sqrt(2 / std::numbers::pi), 3 * r.se);
}

TEST(WeakMomentSigma, DiagonalCovariance) {
  Matrix a(1, 2);
  a << 3, 1;
  const auto est = weak_moment_sigma(lc(Family::gaussian, CoeffMatrix(a)), false, 2.0, 2.0, 20000, 4);
  EXPECT_NEAR(est.value, 3.0, 0.06);
  EXPECT_NEAR(lp_norm(est.witness_t, 2.0), 1.0, 1e-9);
}

TEST(WeakMomentSigma, IsotropyGivesOne) {
  for (Family f : kLogConcaveFamilies) {
    const auto est = weak_moment_sigma(lc(f, CoeffMatrix::ones(1, 4)), true, 2.0, 2.0, 20000, 5);
    EXPECT_NEAR(est.value, 1.0, 0.02 + 3 * est.se) << family_name(f);
    EXPECT_LE(lp_norm(est.witness_t, 2.0), 1.0 + 1e-9);
  }
}

TEST(WeakMomentSigma, LaplaceHighOrderBeatsBasisCandidate) {
  const std::size_t T = 100000;
  const auto spec = lc(Family::laplace, CoeffMatrix::ones(1, 2));
  const auto est = weak_moment_sigma(spec, false, 2.0, 8.0, T, 6);
  // Candidate e_1 evaluated on the same draws.
  const Matrix y = detail::sample_unit_rows(spec, T, 6, 0);
  std::vector<double> p8;
  for (Eigen::Index s = 0; s < y.rows(); ++s) p8.push_back(std::pow(std::abs(y(s, 0)), 8));
  const double basis = std::pow(sorted_sum(p8) / T, 1.0 / 8);
  EXPECT_GE(est.value, basis * 0.95);
  EXPECT_GE(est.value, basis * (1 - 1e-12));
}

TEST(WeakMomentSigma, RejectsLowOrder) {
  EXPECT_THROW(weak_moment_sigma(lc(Family::gaussian, CoeffMatrix::ones(1, 2)), true, 2.0, 0.5, 10, 1),
               DomainError);
}

TEST(WeakChaosU, SingleRowEqualsSigma) {
  Matrix a(1, 3);
  a << 1, 2, 0.5;
  const auto spec = lc(Family::laplace, CoeffMatrix(a));
  const PQParams pq(3, 4);
  const double u = weak_chaos_u(spec, pq, 5000, 7);
  const double sigma = weak_moment_sigma(spec, false, pq, pq.q(), 5000, 7).value;
  EXPECT_NEAR(u, sigma, 1e-12 * sigma);
}

TEST(WeakChaosU, ZeroAndIdentity) {
  EXPECT_EQ(weak_chaos_u(lc(Family::gaussian, CoeffMatrix::zeros(3, 3)), PQParams(2, 2), 100, 8), 0.0);
  const double u = weak_chaos_u(lc(Family::gaussian, CoeffMatrix::identity(4)), PQParams(2, 2), 20000, 9);
  EXPECT_NEAR(u, 1.0, 0.02);
}

TEST(TheoremTerms, MainExample) {
  AuxExpectations aux;
  aux.max_entry = 1.0;
  const auto t = theorem_terms("main11", CoeffMatrix::ones(4, 4), PQParams(2, 2), aux);
  ASSERT_EQ(t.size(), 3U);
  EXPECT_NEAR(t[0].value, std::sqrt(std::log(4.0)) * 2, 1e-12);
  EXPECT_NEAR(t[0].value, 2.3548, 1e-4);
  EXPECT_NEAR(t[1].value, 2.0, 1e-12);
  // (ln 4)^{3/2} = 1.63224
  EXPECT_NEAR(t[2].value, std::pow(std::log(4.0), 1.5), 1e-12);
  EXPECT_NEAR(t[2].value, 1.6325, 5e-4);
}

TEST(TheoremTerms, LemmaAndPropositionExamples) {
  const auto l32 = theorem_terms("lemma32", CoeffMatrix::identity(3), PQParams(2, 3), {});
  ASSERT_EQ(l32.size(), 1U);
  EXPECT_NEAR(l32[0].value, 3.0, 1e-12);

  AuxExpectations aux;
  aux.max_entry = 1.0;
  const auto p15 = theorem_terms("prop15", CoeffMatrix::ones(2, 8), PQParams(2, 2), aux);
  EXPECT_NEAR(p15[0].value, 4 * std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(p15[1].value, 2 * std::log(8.0), 1e-12);
  EXPECT_NEAR(p15[1].value, 4.1589, 1e-4);
}

TEST(TheoremTerms, ImprovedExponents) {
  AuxExpectations aux{2.0, 3.0, 4.0};
  const auto coeff = CoeffMatrix::ones(8, 8);
  const PQParams pq(2, 4);
  TermContext base;
  TermContext improved;
  improved.improved_exponents = true;
  const double lm = std::log(8.0);
  EXPECT_NEAR(theorem_terms("uncond16", coeff, pq, aux, base)[0].value, std::pow(lm, 1.75) * 3.0, 1e-12);
  EXPECT_NEAR(theorem_terms("uncond16", coeff, pq, aux, improved)[0].value, std::pow(lm, 0.75) * 3.0, 1e-12);
  base.gamma = improved.gamma = 1.0;
  EXPECT_NEAR(theorem_terms("mixture42", coeff, pq, aux, base)[2].value, std::pow(lm, 1.25) * 2.0, 1e-12);
  EXPECT_NEAR(theorem_terms("mixture42", coeff, pq, aux, improved)[2].value, std::pow(lm, 0.25) * 2.0, 1e-12);
}

TEST(TheoremTerms, Errors) {
  EXPECT_THROW(theorem_terms("nope", CoeffMatrix::ones(2, 2), PQParams(2, 2), {}), DomainError);
  EXPECT_THROW(theorem_terms("main11", CoeffMatrix::ones(1, 2), PQParams(2, 2), {}), DomainError);
  TermContext ctx;
  ctx.gamma = 0.25;
  EXPECT_THROW(theorem_terms("mixture42", CoeffMatrix::ones(4, 4), PQParams(2, 2), {}, ctx), DomainError);
}

TEST(Verify, CompatibilityChecks) {
  const auto mix = EnsembleSpec::mixture(CoeffMatrix::ones(4, 4), 1.0);
  EXPECT_THROW(verify_inequality("main11", mix, PQParams(2, 2), 4, 1), DomainError);
  EXPECT_THROW(verify_inequality("beta52", mix, PQParams(2, 2), 4, 1), DomainError);
  EXPECT_THROW(verify_inequality("mixture42", lc(Family::gaussian, CoeffMatrix::ones(4, 4)), PQParams(2, 2), 4, 1),
               DomainError);
  EXPECT_THROW(verify_inequality("uncond16", lc(Family::ball_uniform, CoeffMatrix::ones(4, 4)), PQParams(2, 2), 4, 1),
               DomainError);
  EXPECT_NO_THROW(verify_inequality("uncond16", lc(Family::laplace, CoeffMatrix::ones(4, 4)), PQParams(2, 2), 4, 1));
  EXPECT_THROW(verify_inequality("main11", lc(Family::gaussian, CoeffMatrix::ones(1, 4)), PQParams(2, 2), 4, 1),
               DomainError);
  EXPECT_THROW(verify_inequality("bogus", lc(Family::gaussian, CoeffMatrix::ones(4, 4)), PQParams(2, 2), 4, 1),
               DomainError);
}

TEST(Verify, ReportIsSelfConsistent) {
  for (std::string_view id : kInequalityIds) {
    EnsembleSpec spec = lc(Family::laplace, CoeffMatrix::ones(6, 5));
    if (id == "mixture42") spec = EnsembleSpec::mixture(CoeffMatrix::ones(6, 5), 1.0);
    if (id == "beta52") spec = EnsembleSpec::beta_regular(CoeffMatrix::ones(6, 5), 1.0);
    const auto r = verify_inequality(id, spec, PQParams(2, 3), 20, 11, quick());
    double sum = 0;
    for (const auto& t : r.terms) sum += t.value;
    EXPECT_NEAR(r.rhs_bracket, sum, 1e-12 * sum) << id;
    EXPECT_GT(r.lhs_mean, 0) << id;
    EXPECT_GT(r.ratio, 0) << id;
    EXPECT_TRUE(std::isfinite(r.ratio)) << id;
    EXPECT_EQ(r.reverse_ratio.has_value(), id == "reverse12") << id;
  }
}

TEST(Verify, MainTheoremExampleBand) {
  const auto r = verify_inequality("main11", lc(Family::gaussian, CoeffMatrix::ones(16, 16)), PQParams(2, 2), 100, 12,
                                   quick());
  EXPECT_LE(conservative_ratio(r), 3.0);
}

TEST(Verify, ReverseFloorWithZeroRowRemoved) {
  Matrix a = Matrix::Ones(8, 8);
  a.row(3).setZero();
  for (Family f : kLogConcaveFamilies) {
    const auto r = verify_inequality("reverse12", lc(f, CoeffMatrix(a)), PQParams(3, 2), 100, 13, quick());
    EXPECT_GE(conservative_reverse_ratio(r), 0.25) << family_name(f);
    EXPECT_TRUE(*r.reverse_ok);
    EXPECT_GE(*r.reverse_ratio_upper, *r.reverse_ratio);
  }
}

TEST(Verify, Lemma32IdentityExample) {
  const auto r = verify_inequality("lemma32", lc(Family::gaussian, CoeffMatrix::identity(8)), PQParams(2, 4), 10000, 14);
  EXPECT_NEAR(term(r, "col"), 4.0, 1e-12);
  EXPECT_LE(r.ratio, 3.0);
}

TEST(Verify, Homogeneity) {
  const auto spec = lc(Family::cube_uniform, CoeffMatrix::ones(8, 6));
  const auto scaled = spec.with_coeff(CoeffMatrix(Matrix::Constant(8, 6, 2.5)));
  const PQParams pq(3, 2);
  const auto a = verify_inequality("main11", spec, pq, 30, 15, quick());
  const auto b = verify_inequality("main11", scaled, pq, 30, 15, quick());
  for (std::size_t k = 0; k < a.terms.size(); ++k) {
    EXPECT_NEAR(b.terms[k].value, 2.5 * a.terms[k].value, 1e-10 * b.terms[k].value);
  }
  EXPECT_NEAR(b.lhs_mean, 2.5 * a.lhs_mean, 3 * (b.lhs_se + 2.5 * a.lhs_se));
  EXPECT_NEAR(b.ratio, a.ratio, 3 * (a.lhs_se / a.rhs_bracket) * 2);
}

TEST(Verify, PermutationInvariance) {
  Matrix a(6, 5);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 5; ++j) a(i, j) = 1 + 0.3 * i + 0.1 * j * j;
  }
  const Matrix permuted = a.colwise().reverse().rowwise().reverse();
  const PQParams pq(2, 3);
  const auto x = verify_inequality("main11", lc(Family::laplace, CoeffMatrix(a)), pq, 200, 16, quick());
  const auto y = verify_inequality("main11", lc(Family::laplace, CoeffMatrix(permuted)), pq, 200, 16, quick());
  for (std::size_t k = 0; k < 2; ++k) EXPECT_NEAR(x.terms[k].value, y.terms[k].value, 1e-12);
  const double se = std::hypot(x.lhs_se, y.lhs_se);
  EXPECT_NEAR(x.lhs_mean, y.lhs_mean, 3 * se);
}

TEST(Verify, MainBracketDominatesReverseBracket) {
  const auto spec = lc(Family::gaussian, CoeffMatrix::ones(5, 4));
  const PQParams pq(2, 2);
  const auto main = verify_inequality("main11", spec, pq, 20, 17, quick());
  const auto rev = verify_inequality("reverse12", spec, pq, 20, 17, quick());
  EXPECT_GE(main.rhs_bracket, rev.rhs_bracket);
}

TEST(Verify, LhsNondecreasingInDimension) {
  double prev = 0, prev_se = 0;
  for (Eigen::Index n : {4, 8, 16, 32}) {
    const auto r = verify_inequality("main11", lc(Family::gaussian, CoeffMatrix::ones(8, n)), PQParams(3, 3), 40, 18,
                                     quick());
    EXPECT_GE(r.lhs_mean, prev - 3 * std::hypot(r.lhs_se, prev_se));
    prev = r.lhs_mean;
    prev_se = r.lhs_se;
  }
}

TEST(Verify, ThreadCountDoesNotMatter) {
  auto o1 = quick();
  auto o3 = quick();
  o1.mc.threads = 1;
  o3.mc.threads = 3;
  o1.record_runtime = o3.record_runtime = false;
  const auto spec = lc(Family::l1ball_uniform, CoeffMatrix::ones(10, 10));
  const auto a = verify_inequality("cor13", spec, PQParams(4, 2), 16, 19, o1);
  const auto b = verify_inequality("cor13", spec, PQParams(4, 2), 16, 19, o3);
  EXPECT_EQ(a.lhs_mean, b.lhs_mean);
  EXPECT_EQ(a.rhs_bracket, b.rhs_bracket);
}
