// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "test_support.hpp"

using namespace relaybf;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string &what) {
    if (!ok) {
      if (pass) detail << " first failure: ";
      else detail << "; ";
      detail << what;
    }
    pass = pass && ok;
  }
};

int failures = 0;

void report(int id, const std::string &title, const std::function<void(Outcome &)> &body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail << " exception: " << e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s  [%2d] %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), secs, o.detail.str().c_str());
  std::fflush(stdout);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

bool within_rel(double actual, double expected, double tol) { return std::abs(actual - expected) <= tol * std::abs(expected); }

IndivPowerProblem fixture(int n) {
  const bool four = n == 4;
  return IndivPowerProblem{
      fixtures::unit_scaling_stats(four ? fixtures::indiv_n4_R() : fixtures::indiv_n6_R(),
                                   four ? fixtures::indiv_n4_Q() : fixtures::indiv_n6_Q()),
      fixtures::kIndivPs, RVector::Constant(n, fixtures::kIndivCap)};
}

struct FixtureRun {
  double sdp = 0, eig_small = 0, eig_large = 0, cdm = 0, pnorm = 0, grp = 0;
  double search_secs = 0, grp_secs = 0;
  std::vector<CVector> qcqp_vectors;  // cdm, pnorm, grp in QCQP scaling
};

FixtureRun run_fixture(int n) {
  const auto p = fixture(n);
  const auto q = build_qcqp(p);
  FixtureRun out;
  auto t0 = std::chrono::steady_clock::now();
  const auto relax = solve_via_sdp(p);
  const auto e = hermitian_eig(relax.sdp.X);
  out.sdp = relax.sdp.primal_obj;
  out.eig_large = e.eigenvalues(n - 1);
  out.eig_small = e.eigenvalues(n - 2);
  const CVector start = std::sqrt(e.max()) * e.vector(n - 1);
  const auto cdm = coordinate_descent(p, start);
  const auto pn = augmented_lagrangian_solve(p, build_pnorm_embedding(p, 1024), start);
  out.cdm = cdm.qcqp_objective;
  out.pnorm = pn.qcqp_objective;
  out.search_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t0 = std::chrono::steady_clock::now();
  const CVector g = grp_extract(relax.sdp.X, q, 1'000'000, 1);
  out.grp_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.grp = qcqp_objective(q, g);
  out.qcqp_vectors = {scale_to_qcqp_boundary(q, cdm.w_raw), scale_to_qcqp_boundary(q, pn.w_raw), g};
  return out;
}

void check_fixture(Outcome &o, const FixtureRun &r, const fixtures::IndivExpectation &ex, double grp_tol) {
  o.require(within_rel(r.sdp, ex.sdp, 2e-2), "SDP " + fmt(r.sdp) + " vs " + fmt(ex.sdp));
  o.require(within_rel(r.eig_small, ex.eig_small, 2e-2), "eigenvalue " + fmt(r.eig_small) + " vs " + fmt(ex.eig_small));
  o.require(within_rel(r.eig_large, ex.eig_large, 2e-2), "eigenvalue " + fmt(r.eig_large) + " vs " + fmt(ex.eig_large));
  o.require(within_rel(r.cdm, ex.cdm, 2e-2), "CDM " + fmt(r.cdm) + " vs " + fmt(ex.cdm));
  o.require(within_rel(r.pnorm, ex.pnorm, 2e-2), "p-norm " + fmt(r.pnorm) + " vs " + fmt(ex.pnorm));
  o.require(within_rel(r.grp, ex.grp, grp_tol), "GRP " + fmt(r.grp) + " vs " + fmt(ex.grp));
  o.require(r.search_secs < 60.0, "SDP + search took " + fmt(r.search_secs) + " s");
  o.require(r.grp_secs < 600.0, "GRP took " + fmt(r.grp_secs) + " s");
  if (o.pass)
    o.detail << ": SDP " << fmt(r.sdp) << ", eig {" << fmt(r.eig_small) << ", " << fmt(r.eig_large) << "}, CDM "
             << fmt(r.cdm) << ", p-norm " << fmt(r.pnorm) << ", GRP " << fmt(r.grp);
}

// Independent evaluation of the diagonal fractional objective's parametric function.
double F_ref(const IndivPowerProblem &p, double t) {
  double f = -t;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double c = p.P(k) / (p.Ps * p.stats.D(k) + p.stats.sigma2);
    f += c * std::max(0.0, p.Ps / p.stats.sigma2 * p.stats.R(k, k).real() - t * p.stats.Q(k, k).real());
  }
  return f;
}

ScalarFractionalSubproblem scalar_draw(int i, Rng &rng) {
  if (i % 10 == 0) {
    // Numerator a fixed multiple of the denominator.
    ScalarFractionalSubproblem s;
    s.a2 = uniform(rng, 0.1, 2.0);
    s.b2 = Complex(uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3));
    s.c2 = uniform(rng, 1.0, 3.0);
    const double m = uniform(rng, 0.2, 5.0);
    s.a1 = m * s.a2;
    s.b1 = m * s.b2;
    s.c1 = m * s.c2;
    s.beta = uniform(rng, 0.2, 2.0);
    return s;
  }
  const auto p = rand_indiv_general(3, rng);
  auto s = extract_coefficients(p, CVector(uniform(rng, 0.1, 1.0) * rand_cvector(3, rng)), i % 3);
  s.beta *= uniform(rng, 0.2, 6.0);
  return s;
}

} // namespace

int main() {
  std::printf("relaybf acceptance suite\n");

  FixtureRun n4, n6;
  report(1, "N=4 individual-power fixture", [&](Outcome &o) {
    n4 = run_fixture(4);
    check_fixture(o, n4, fixtures::kIndivN4, 2e-2);
  });

  report(2, "N=6 individual-power fixture", [&](Outcome &o) {
    n6 = run_fixture(6);
    check_fixture(o, n6, fixtures::kIndivN6, 3e-2);
    const double gap = n6.cdm / n6.grp - 1.0;
    o.require(gap >= 0.07, "CDM over GRP " + fmt(100 * gap) + "% < 7%");
    o.detail << ", CDM over GRP " << fmt(100 * gap) << "%";
  });

  report(3, "ordering GRP <= p-norm ~ CDM <= SDP on both fixtures", [&](Outcome &o) {
    for (const auto *r : {&n4, &n6}) {
      o.require(r->sdp > 0.0, "fixture run missing");
      o.require(r->grp <= r->pnorm && r->grp <= r->cdm, "GRP above a search solver");
      o.require(r->cdm <= r->sdp * (1 + 1e-6) && r->pnorm <= r->sdp * (1 + 1e-6), "search solver above the bound");
      o.require(within_rel(r->pnorm, r->cdm, 2e-2), "p-norm and CDM differ by more than 2%");
    }
  });

  report(4, "total-power fixtures (sigma^2 = 1, P0 = 10 assumed)", [&](Outcome &o) {
    int n = 0;
    for (const auto &c : reproduce("total-1")) o.require(c.pass, c.case_id + " " + c.quantity + " " + c.note), ++n;
    for (const auto &c : reproduce("total-2")) o.require(c.pass, c.case_id + " " + c.quantity + " " + c.note), ++n;
    o.detail << ": " << n << " checks; assumption sigma^2 = 1, P0 = 10";
  });

  report(5, "diagonal cross-checks on 100 random instances", [&](Outcome &o) {
    Rng rng(501);
    NewtonOptions tight;
    tight.step_tol = 1e-10;
    tight.d1_tol = 1e-10;
    double worst_x = 0.0, worst_snr = 0.0;
    int oracle_runs = 0;
    for (int i = 0; i < 100; ++i) {
      const Eigen::Index n = 2 + i % 5;
      const TotalPowerProblem tp{ChannelStats{rand_positive(n, rng), HermitianMatrix::diagonal(rand_positive(n, rng)),
                                              HermitianMatrix::diagonal(rand_positive(n, rng)), uniform(rng, 0.5, 2.0)},
                                 uniform(rng, 1.0, 100.0)};
      worst_x = std::max(worst_x, std::abs(newton_multistart(tp, tight).x - solve_diagonal(tp).x));
      const auto ip = rand_indiv_diag(n, rng);
      if (n <= 3) {
        worst_snr = std::max(worst_snr, rel_diff(solve_diagonal(ip).snr, brute_force_indiv(ip).snr));
        ++oracle_runs;
      }
    }
    o.require(worst_x <= 1e-6, "Newton vs closed form |dx| = " + fmt(worst_x));
    o.require(worst_snr <= 1e-3, "closed form vs grid oracle rel = " + fmt(worst_snr));
    o.detail << ": max |dx| " << fmt(worst_x) << ", max SNR rel diff " << fmt(worst_snr) << " over " << oracle_runs
             << " oracle runs";
  });

  report(6, "derivatives vs central differences (50 instances each)", [&](Outcome &o) {
    Rng rng(601);
    double worst_eig = 0.0, worst_phi = 0.0;
    for (int i = 0; i < 50; ++i) {
      const TotalPowerProblem tp{build_stats(rand_rician(2 + i % 5, rng), uniform(rng, 0.5, 2.0)), uniform(rng, 1.0, 100.0)};
      const SPair s = build_s_pair(tp);
      const double x = uniform(rng, 0.1, 0.9);
      const auto d = eig_derivatives(s, x);
      const auto f = [&](double t) { return lambda_min_g(s, t).value; };
      const double fd1 = finite_diff(f, x, 1e-5), fd2 = finite_diff2(f, x, 1e-4);
      worst_eig = std::max({worst_eig, std::abs(d.d1 - fd1) / std::max(std::abs(fd1), 1.0),
                            std::abs(d.d2 - fd2) / std::max(std::abs(fd2), 1.0)});
    }
    for (int i = 0; i < 50; ++i) {
      const int pexp = std::array{2, 8, 64}[static_cast<std::size_t>(i % 3)];
      const auto e = build_pnorm_embedding(rand_indiv_general(2 + i % 5, rng), pexp);
      const RVector z = stack(rand_cvector(e.relays(), rng));
      const auto d = phi_p_grad_hess(e, z);
      const double h = 1e-6 * z.norm();
      const RVector g = finite_diff_gradient([&](const RVector &v) { return phi_p_grad_hess(e, v).value; }, z, h);
      const RMatrix hs = finite_diff_jacobian([&](const RVector &v) { return RVector(phi_p_grad_hess(e, v).grad); }, z, h);
      worst_phi = std::max({worst_phi, (d.grad - g).norm() / d.grad.norm(), (d.hess - hs).norm() / d.hess.norm()});
    }
    o.require(worst_eig <= 1e-4, "eig_derivatives rel error " + fmt(worst_eig));
    o.require(worst_phi <= 1e-4, "phi_p rel error " + fmt(worst_phi));
    o.detail << ": worst rel error eig " << fmt(worst_eig) << ", phi_p " << fmt(worst_phi);
  });

  report(7, "scalar subproblem vs polar grid (200 draws, all branches)", [&](Outcome &o) {
    Rng rng(701);
    std::map<SubproblemBranch, int> seen;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const auto s = scalar_draw(i, rng);
      const auto r = solve_scalar_subproblem(s);
      seen[r.branch]++;
      const double grid = polar_grid_max([&](Complex y) { return s.value(y); }, s.beta);
      o.require(std::abs(r.y) <= s.beta * (1 + 1e-12), "returned |y| outside the disc");
      worst = std::max(worst, std::abs(r.t - grid) / std::max(1.0, std::abs(grid)));
    }
    o.require(worst <= 1e-4, "value differs from grid by " + fmt(worst));
    o.require(seen[SubproblemBranch::Constant] > 0 && seen[SubproblemBranch::Boundary] > 0 &&
                  seen[SubproblemBranch::Interior] > 0,
              "a branch was not exercised");
    o.detail << ": worst diff " << fmt(worst) << "; branches constant " << seen[SubproblemBranch::Constant]
             << ", boundary " << seen[SubproblemBranch::Boundary] << ", interior " << seen[SubproblemBranch::Interior];
  });

  report(8, "rank-one construction on 50 rank>=2 relaxations (N = 2, 3)", [&](Outcome &o) {
    Rng rng(801);
    double worst_obj = 0.0, worst_feas = 0.0;
    std::map<int, int> ranks;
    for (int i = 0; i < 50; ++i) {
      const auto p = rank2_instance(2 + i % 2, rng);
      const auto q = build_qcqp(p);
      const auto r = solve_via_sdp(p);
      ranks[r.sdp.rank_estimate]++;
      const CVector w = rank_one_decompose(r.sdp.X, q);
      worst_obj = std::max(worst_obj, rel_diff(qcqp_objective(q, w), r.sdp.primal_obj));
      worst_feas = std::max(worst_feas, qcqp_max_constraint(q, w) - 1.0);
    }
    o.require(worst_obj <= 1e-6, "objective off by " + fmt(worst_obj));
    o.require(worst_feas <= 1e-9, "constraint violated by " + fmt(worst_feas));
    o.detail << ": worst rel objective gap " << fmt(worst_obj) << ", worst violation " << fmt(worst_feas) << "; ranks";
    for (const auto &[k, v] : ranks) o.detail << " " << k << ":" << v;
  });

  report(9, "Dinkelbach function on 100 random diagonal instances", [&](Outcome &o) {
    Rng rng(901);
    double worst_f = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto p = rand_indiv_diag(1 + i % 6, rng);
      const auto s = solve_diagonal_detailed(p);
      const RVector t = dinkelbach_breakpoints(p);
      for (int j = 0; j < 20; ++j) {
        const double a = uniform(rng, 0.0, 1.5 * t.maxCoeff()), b = a + uniform(rng, 1e-6, t.maxCoeff());
        o.require(dinkelbach_F(p, a).F_value > dinkelbach_F(p, b).F_value, "F not strictly decreasing");
      }
      worst_f = std::max(worst_f, std::abs(dinkelbach_F(p, s.t_star).F_value));
      o.require(std::abs(F_ref(p, s.t_star)) <= 1e-9 * std::max(1.0, s.t_star), "independent F nonzero at t*");
      // Reference partition: first sorted break point where F turns non-positive.
      std::vector<double> sorted(t.data(), t.data() + t.size());
      std::sort(sorted.begin(), sorted.end());
      std::size_t k0 = sorted.size() - 1;
      for (std::size_t k = 0; k < sorted.size(); ++k)
        if (F_ref(p, sorted[k]) <= 0.0) {
          k0 = F_ref(p, sorted[k]) == 0.0 ? k + 1 : k;
          break;
        }
      o.require(s.k0 == k0, "k0 mismatch");
      for (Eigen::Index k = 0; k < p.size(); ++k) {
        const bool active = s.solution.w(k) != Complex(0.0, 0.0);
        if (t(k) > s.t_star) o.require(active, "relay above t* silent");
        if (t(k) < s.t_star) o.require(!active, "relay below t* active");
      }
    }
    o.require(worst_f <= 1e-9, "|F(t*)| = " + fmt(worst_f));
    o.detail << ": max |F(t*)| " << fmt(worst_f);
  });

  report(10, "Monte Carlo vs closed-form statistics (1e5 samples)", [&](Outcome &o) {
    int which = 0;
    for (const auto &par : {fixtures::total_power_1(), fixtures::total_power_2()}) {
      ++which;
      const auto s = build_stats(par);
      const auto m = monte_carlo_stats(par, 100000, 2024);
      const double er = (m.R.matrix() - s.R.matrix()).norm() / s.R.norm();
      const double eq = (m.Q.matrix() - s.Q.matrix()).norm() / s.Q.norm();
      o.require(er <= 0.05 && eq <= 0.05, "fixture " + std::to_string(which) + " error R " + fmt(er) + ", Q " + fmt(eq));
      o.detail << (which == 1 ? ": " : "; ") << "fixture " << which << " R " << fmt(er) << ", Q " << fmt(eq);
    }
  });

  report(11, "feasibility audit across solvers", [&](Outcome &o) {
    int audited = 0;
    auto audit = [&](const IndivPowerProblem &p, const CVector &w, const std::string &who) {
      const RVector sl = per_relay_slacks(p.stats, p.Ps, p.P, w);
      o.require(sl.minCoeff() >= -1e-9, who + ": slack " + fmt(sl.minCoeff()));
      o.require(sl.cwiseAbs().minCoeff() <= 1e-9, who + ": no active constraint");
      ++audited;
    };
    for (int n : {4, 6}) {
      const auto p = fixture(n);
      const auto q = build_qcqp(p);
      const auto &r = n == 4 ? n4 : n6;
      const char *names[] = {"cdm", "pnorm", "grp"};
      for (std::size_t i = 0; i < r.qcqp_vectors.size(); ++i)
        audit(p, rescale_to_original(r.qcqp_vectors[i], q, p).w, std::string(names[i]) + " N=" + std::to_string(n));
    }
    Rng rng(1101);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Index n = 2 + i % 2;
      const auto p = i % 4 == 0 ? rand_indiv_diag(n, rng) : rand_indiv_general(n, rng);
      const auto q = build_qcqp(p);
      const auto relax = solve_via_sdp(p);
      const CVector start = CVector::Ones(n);
      if (p.stats.is_diagonal()) audit(p, solve_diagonal(p).w, "indiv-diag");
      audit(p, rescale_to_original(rank_one_decompose(relax.sdp.X, q), q, p).w, "rank-one");
      audit(p, rescale_to_original(grp_extract(relax.sdp.X, q, 5000, 3), q, p).w, "grp");
      audit(p, coordinate_descent(p, start).solution.w, "cdm");
      audit(p, augmented_lagrangian_solve(p, build_pnorm_embedding(p, 256), start).solution.w, "pnorm");
      audit(p, brute_force_indiv(p, GridSpec{12, 16}).w, "oracle");
    }
    for (int which : {1, 2}) {
      const TotalPowerProblem tp{build_stats(which == 1 ? fixtures::total_power_1() : fixtures::total_power_2()), 10.0};
      const auto r = solve(tp);
      const double used = r.Ps + powers(tp.stats, r.Ps, r.w).total;
      o.require(std::abs(used - tp.P0) <= 1e-9 * tp.P0, "total budget not saturated");
      ++audited;
    }
    o.detail << ": " << audited << " solutions audited";
  });

  std::printf("%s: %d of 11 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
