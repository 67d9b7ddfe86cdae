#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace relaybf;
using namespace testsupport;

namespace {

// Ps/sigma^2 = 1 and P/(Ps D + sigma^2) = 1, so F(t) = -t + (1 - t)^+.
IndivPowerProblem single_relay() {
  return IndivPowerProblem{ChannelStats{RVector::Zero(1), HermitianMatrix::identity(1), HermitianMatrix::identity(1), 1.0},
                           1.0, RVector::Ones(1)};
}

double bisection_t_star(const IndivPowerProblem &p) {
  const auto f = [&](double t) { return dinkelbach_F(p, t).F_value; };
  double hi = 1.0;
  while (f(hi) > 0.0) hi *= 2.0;
  return bisect_decreasing(f, 0.0, hi);
}

} // namespace

TEST(DinkelbachF, SingleRelay) {
  const auto p = single_relay();
  EXPECT_DOUBLE_EQ(dinkelbach_F(p, 0.0).F_value, 1.0);
  EXPECT_DOUBLE_EQ(dinkelbach_F(p, 0.25).F_value, 0.5);
  EXPECT_DOUBLE_EQ(dinkelbach_F(p, 2.0).F_value, -2.0);
  const auto s = solve_diagonal_detailed(p);
  EXPECT_DOUBLE_EQ(s.t_star, 0.5);
  EXPECT_DOUBLE_EQ(std::norm(s.solution.w(0)), 1.0);
}

TEST(DinkelbachF, PositiveAtZeroNegativeAtLastBreakpoint) {
  Rng rng(51);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = rand_indiv_diag(1 + trial % 6, rng);
    EXPECT_GT(dinkelbach_F(p, 0.0).F_value, 0.0);
    const double tn = dinkelbach_breakpoints(p).maxCoeff();
    EXPECT_NEAR(dinkelbach_F(p, tn).F_value, -tn, 1e-12 * tn);
  }
}

TEST(DinkelbachF, StrictlyDecreasing) {
  Rng rng(52);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = rand_indiv_diag(2 + trial % 5, rng);
    const double tn = dinkelbach_breakpoints(p).maxCoeff();
    for (int i = 0; i < 20; ++i) {
      const double a = uniform(rng, 0.0, 1.2 * tn), b = a + uniform(rng, 1e-6, tn);
      EXPECT_GT(dinkelbach_F(p, a).F_value, dinkelbach_F(p, b).F_value);
    }
  }
}

TEST(DinkelbachF, RejectsGeneralInstances) {
  Rng rng(53);
  EXPECT_THROW(dinkelbach_F(rand_indiv_general(3, rng), 1.0), DispatchError);
  EXPECT_THROW(solve_diagonal(rand_indiv_general(3, rng)), DispatchError);
}

TEST(SolveDiagonal, RootMatchesBisection) {
  Rng rng(54);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = rand_indiv_diag(1 + trial % 6, rng);
    const auto s = solve_diagonal_detailed(p);
    const double ref = bisection_t_star(p);
    EXPECT_LE(rel_diff(s.t_star, ref), 1e-9) << trial;
    EXPECT_LE(std::abs(dinkelbach_F(p, s.t_star).F_value), 1e-9 * std::max(1.0, s.t_star)) << trial;
    EXPECT_LE(rel_diff(s.solution.snr, s.t_star), 1e-12) << trial;
    EXPECT_GT(s.t_star, 0.0);
    EXPECT_LT(s.t_star, dinkelbach_breakpoints(p).maxCoeff());
  }
}

TEST(SolveDiagonal, ActiveSetFollowsBreakpoints) {
  Rng rng(55);
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = rand_indiv_diag(2 + trial % 5, rng);
    const auto s = solve_diagonal_detailed(p);
    const RVector t = dinkelbach_breakpoints(p);
    const RVector caps = p.P;
    const auto pw = powers(p.stats, p.Ps, s.solution.w).per_relay;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      if (t(k) > s.t_star) EXPECT_NEAR(pw(k), caps(k), 1e-12 * caps(k)) << trial;
      if (t(k) < s.t_star) EXPECT_EQ(pw(k), 0.0) << trial;
    }
    // Positions before k0 in break-point order are exactly the silent relays.
    for (std::size_t i = 0; i < s.order.size(); ++i)
      EXPECT_EQ(i >= s.k0, s.solution.w(s.order[i]) != Complex(0.0, 0.0)) << trial;
  }
}

TEST(SolveDiagonal, FeasibleWithActiveCap) {
  Rng rng(56);
  for (int trial = 0; trial < 30; ++trial) {
    const auto s = solve_diagonal(rand_indiv_diag(1 + trial % 6, rng));
    EXPECT_GE(s.slacks.minCoeff(), -1e-9);
    EXPECT_LE(s.slacks.cwiseAbs().minCoeff(), 1e-9);
  }
}

TEST(SolveDiagonal, MatchesGridOracle) {
  Rng rng(57);
  for (int trial = 0; trial < 10; ++trial) {
    const auto p = rand_indiv_diag(2, rng);
    const auto s = solve_diagonal(p);
    EXPECT_LE(rel_diff(s.snr, brute_force_indiv(p).snr), 1e-3) << trial;
  }
}

TEST(SolveDiagonal, ZeroGainsAreDegenerate) {
  auto p = single_relay();
  p.stats.R = HermitianMatrix::zero(1);
  EXPECT_THROW(solve_diagonal(p), DegeneracyError);
}

TEST(SolveDiagonal, RelayWithoutRelayNoiseAlwaysTransmits) {
  // q_k = 0 puts the break point at infinity.
  RVector q(2);
  q << 1.0, 0.0;
  const IndivPowerProblem p{ChannelStats{RVector::Ones(2), HermitianMatrix::identity(2), HermitianMatrix::diagonal(q), 1.0},
                            1.0, RVector::Ones(2)};
  const auto s = solve_diagonal_detailed(p);
  EXPECT_TRUE(std::isinf(dinkelbach_breakpoints(p)(1)));
  EXPECT_NE(s.solution.w(1), Complex(0.0, 0.0));
  EXPECT_LE(rel_diff(s.t_star, bisection_t_star(p)), 1e-9);
}
