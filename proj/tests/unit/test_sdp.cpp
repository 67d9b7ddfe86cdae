#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace relaybf;
using namespace testsupport;

namespace {

SdpProblem random_qcqp_relaxation(Eigen::Index n, Rng &rng) {
  return build_qcqp(rand_indiv_general(n, rng)).sdp_problem();
}

} // namespace

TEST(SdpRelaxation, SingleTraceConstraint) {
  const SdpProblem p{HermitianMatrix::identity(2), {HermitianMatrix::identity(2)}};
  const auto s = solve_relaxation(p);
  EXPECT_NEAR(s.primal_obj, 1.0, 1e-7);
  EXPECT_NEAR(s.X.trace(), 1.0, 1e-7);
}

TEST(SdpRelaxation, FixtureFourRelays) {
  const IndivPowerProblem p{fixtures::unit_scaling_stats(fixtures::indiv_n4_R(), fixtures::indiv_n4_Q()), 1.0,
                            RVector::Constant(4, 2.0)};
  const auto s = solve_relaxation(build_qcqp(p).sdp_problem());
  EXPECT_LE(rel_diff(s.primal_obj, 3.74112), 2e-2);
  EXPECT_EQ(s.rank_estimate, 2);
  const auto e = hermitian_eig(s.X);
  EXPECT_LE(rel_diff(e.eigenvalues(3), 1.8148), 2e-2);
  EXPECT_LE(rel_diff(e.eigenvalues(2), 0.2064), 2e-2);
  EXPECT_LE(std::abs(e.eigenvalues(1)), 1e-6);
}

TEST(SdpRelaxation, FixtureSixRelays) {
  const IndivPowerProblem p{fixtures::unit_scaling_stats(fixtures::indiv_n6_R(), fixtures::indiv_n6_Q()), 1.0,
                            RVector::Constant(6, 2.0)};
  const auto s = solve_relaxation(build_qcqp(p).sdp_problem());
  EXPECT_LE(rel_diff(s.primal_obj, 9.33816), 2e-2);
  EXPECT_EQ(s.rank_estimate, 2);
  const auto e = hermitian_eig(s.X);
  EXPECT_LE(rel_diff(e.eigenvalues(5), 2.3774), 2e-2);
  EXPECT_LE(rel_diff(e.eigenvalues(4), 0.8369), 2e-2);
}

TEST(SdpRelaxation, CertificateResidualsSmallOnSolutions) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const SdpProblem p = random_qcqp_relaxation(2 + trial % 5, rng);
    const auto s = solve_relaxation(p);
    const auto c = dual_certificate_residuals(p, s);
    EXPECT_LE(c.primal_feas, 1e-7) << trial;
    EXPECT_GE(c.dual_feas, -1e-7) << trial;
    EXPECT_LE(c.comp_slack, 1e-6) << trial;
    EXPECT_LE(s.gap, 1e-8 * std::max(1.0, std::abs(s.primal_obj))) << trial;
  }
}

TEST(SdpRelaxation, CertificateFlagsBadPoints) {
  Rng rng(22);
  const SdpProblem p = random_qcqp_relaxation(3, rng);
  auto s = solve_relaxation(p);
  SdpSolution doubled = s;
  doubled.X = 2.0 * s.X;
  EXPECT_GT(dual_certificate_residuals(p, doubled).primal_feas, 0.5);
  SdpSolution no_dual = s;
  no_dual.dual_y.assign(p.constraints.size(), 0.0);
  EXPECT_NEAR(dual_certificate_residuals(p, no_dual).dual_feas, lambda_min(-1.0 * p.objective), 1e-12);
  EXPECT_LT(dual_certificate_residuals(p, no_dual).dual_feas, 0.0);
}

TEST(SdpRelaxation, DominatesEveryFeasibleVector) {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const auto prob = rand_indiv_general(3, rng);
    const QcqpInstance q = build_qcqp(prob);
    const auto s = solve_relaxation(q.sdp_problem());
    for (int k = 0; k < 200; ++k) {
      const CVector w = scale_to_qcqp_boundary(q, rand_cvector(3, rng));
      EXPECT_LE(qcqp_objective(q, w), s.primal_obj * (1.0 + 1e-8));
    }
  }
}

TEST(SdpRelaxation, GapShrinksOverIterations) {
  Rng rng(24);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = solve_relaxation(random_qcqp_relaxation(4, rng));
    ASSERT_FALSE(s.gap_history.empty());
    EXPECT_LE(s.gap_history.back(), s.gap_history.front());
  }
}

TEST(SdpRelaxation, ScaleEquivariance) {
  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    SdpProblem p = random_qcqp_relaxation(3, rng);
    const auto s1 = solve_relaxation(p);
    const double alpha = uniform(rng, 0.1, 10.0);
    p.objective = alpha * p.objective;
    const auto s2 = solve_relaxation(p);
    EXPECT_LE(rel_diff(s2.primal_obj, alpha * s1.primal_obj), 1e-7);
    // A tight relaxation has a unique optimizer; compare X only then. X itself
    // converges only to about the square root of the duality gap.
    if (s1.rank_estimate == 1) EXPECT_LE((s2.X.matrix() - s1.X.matrix()).norm(), 1e-4 * s1.X.norm());
  }
}

TEST(SdpRelaxation, RejectsMalformedProblems) {
  EXPECT_THROW(solve_relaxation(SdpProblem{HermitianMatrix::identity(2), {}}), ModelError);
  EXPECT_THROW(solve_relaxation(SdpProblem{HermitianMatrix::identity(2), {HermitianMatrix::identity(3)}}), InputError);
}

TEST(SdpRelaxation, IterationBudgetReportsBestIterate) {
  Rng rng(26);
  SdpOptions o;
  o.max_newton = 2;
  try {
    solve_relaxation(random_qcqp_relaxation(4, rng), o);
    FAIL() << "expected a convergence error";
  } catch (const SdpConvergenceError &e) {
    EXPECT_EQ(e.best().newton_steps, 2);
    EXPECT_TRUE(all_finite(e.best().X.matrix()));
  }
}
