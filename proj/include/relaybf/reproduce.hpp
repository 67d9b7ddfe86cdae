#pragma once

// Published reference cases: runs each embedded fixture and compares against
// the printed numbers. Failures are recorded in the table, never thrown.

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "relaybf/fixtures.hpp"
#include "relaybf/indiv_qcqp.hpp"
#include "relaybf/indiv_search.hpp"
#include "relaybf/total_power.hpp"

namespace relaybf {

struct Check {
  std::string case_id;
  std::string quantity;
  double expected = 0.0;
  double actual = 0.0;
  double tol = 0.0;
  bool relative = false;
  bool pass = false;
  std::string note;
};

struct ReproduceOptions {
  std::int64_t grp_samples = 1'000'000;
  std::uint64_t seed = 1;
  int p = 1024;
};

inline const std::vector<std::string> &reproduce_cases() {
  static const std::vector<std::string> ids{"total-1", "total-2", "indiv-n4", "indiv-n6"};
  return ids;
}

namespace detail {

inline Check make_check(const std::string &id, const std::string &q, double expected, double actual, double tol,
                        bool relative) {
  const double err = relative ? std::abs(actual - expected) / std::abs(expected) : std::abs(actual - expected);
  return Check{id, q, expected, actual, tol, relative, std::isfinite(actual) && err <= tol, ""};
}

inline void reproduce_total(const std::string &id, const RicianParams &par, const fixtures::TotalPowerExpectation &ex,
                            std::vector<Check> &out) {
  constexpr double tol = 5e-3;
  const std::string assumption = "assumes sigma^2 = 1, P0 = 10 for the '10 dB' figures";
  const TotalPowerProblem p{build_stats(par, fixtures::kTotalSigma2), fixtures::kTotalP0};
  const SPair s = build_s_pair(p);
  const Bracket br = bracket_x(s);
  auto xl = make_check(id, "x_l", ex.x_lower, br.x_l, tol, false);
  auto xu = make_check(id, "x_u", ex.x_upper, br.x_u, tol, false);
  xl.note = assumption;
  if (!xl.pass || !xu.pass) {
    // The P0/sigma^2 ratio behind the figures is not stated; report which candidate matches.
    std::ostringstream os;
    os << "bracket mismatch at P0/sigma^2 = 10;";
    bool found = false;
    for (double ratio : {1.0, 10.0, 100.0}) {
      const Bracket b = bracket_x(build_s_pair(TotalPowerProblem{build_stats(par, 1.0), ratio}));
      if (std::abs(b.x_l - ex.x_lower) <= tol && std::abs(b.x_u - ex.x_upper) <= tol) {
        os << " P0/sigma^2 = " << ratio << " reproduces it";
        found = true;
      }
    }
    if (!found) os << " blocked by ambiguity: no ratio in {1, 10, 100} reproduces it";
    xu.note = os.str();
  }
  out.push_back(xl);
  out.push_back(xu);
  const std::pair<double, std::pair<double, double>> starts[] = {
      {br.x_l, {ex.x_from_lower, ex.lambda_from_lower}}, {br.x_u, {ex.x_from_upper, ex.lambda_from_upper}}};
  const char *names[] = {"x_l", "x_u"};
  for (int i = 0; i < 2; ++i) {
    const std::string tag = std::string("start ") + names[i];
    try {
      const auto r = newton_solve(p, starts[i].first);
      out.push_back(make_check(id, tag + ": x*", starts[i].second.first, r.x, tol, false));
      out.push_back(make_check(id, tag + ": lambda_min", starts[i].second.second, r.lambda_min, tol, false));
      auto it = make_check(id, tag + ": Newton iterations <= 30", 30, r.iterations, 0, false);
      it.pass = r.iterations <= 30;
      out.push_back(it);
    } catch (const Error &e) {
      Check c{id, tag, starts[i].second.first, NAN, tol, false, false, e.what()};
      out.push_back(c);
    }
  }
}

inline void reproduce_indiv(const std::string &id, const HermitianMatrix &R, const HermitianMatrix &Q,
                            const fixtures::IndivExpectation &ex, double grp_tol, bool check_gap,
                            const ReproduceOptions &o, std::vector<Check> &out) {
  constexpr double tol = 2e-2;
  const IndivPowerProblem p{fixtures::unit_scaling_stats(R, Q), fixtures::kIndivPs,
                            RVector::Constant(R.size(), fixtures::kIndivCap)};
  const QcqpInstance q = build_qcqp(p);
  const auto sdp = solve_via_sdp(p);
  const auto e = hermitian_eig(sdp.sdp.X);
  const Eigen::Index n = e.size();
  auto c = make_check(id, "SDP relaxation", ex.sdp, sdp.sdp.primal_obj, tol, true);
  c.note = "relaxation rank " + std::to_string(sdp.sdp.rank_estimate);
  out.push_back(c);
  out.push_back(make_check(id, "X* eigenvalue (second largest)", ex.eig_small, e.eigenvalues(n - 2), tol, true));
  out.push_back(make_check(id, "X* eigenvalue (largest)", ex.eig_large, e.eigenvalues(n - 1), tol, true));

  const CVector start = std::sqrt(e.max()) * e.vector(n - 1);
  double cdm_value = NAN, grp_value = NAN;
  try {
    const auto cdm = coordinate_descent(p, start);
    cdm_value = cdm.qcqp_objective;
    out.push_back(make_check(id, "coordinate descent", ex.cdm, cdm_value, tol, true));
  } catch (const Error &err) {
    out.push_back(Check{id, "coordinate descent", ex.cdm, NAN, tol, true, false, err.what()});
  }
  try {
    const auto pn = augmented_lagrangian_solve(p, build_pnorm_embedding(p, o.p), start);
    auto pc = make_check(id, "p-norm approximation", ex.pnorm, pn.qcqp_objective, tol, true);
    pc.note = "p = " + std::to_string(o.p);
    out.push_back(pc);
  } catch (const Error &err) {
    out.push_back(Check{id, "p-norm approximation", ex.pnorm, NAN, tol, true, false, err.what()});
  }
  const CVector g = grp_extract(sdp.sdp.X, q, o.grp_samples, o.seed);
  grp_value = qcqp_objective(q, g);
  auto gc = make_check(id, "GRP", ex.grp, grp_value, grp_tol, true);
  gc.note = std::to_string(o.grp_samples) + " samples, seed " + std::to_string(o.seed);
  out.push_back(gc);
  if (check_gap) {
    Check gap{id, "CDM / GRP - 1 >= 7%", 0.07, cdm_value / grp_value - 1.0, 0.0, false, false, "reference gap 9.77%"};
    gap.pass = std::isfinite(gap.actual) && gap.actual >= 0.07;
    out.push_back(gap);
  }
}

} // namespace detail

/// Runs one case ("total-1", "total-2", "indiv-n4", "indiv-n6") or "all".
inline std::vector<Check> reproduce(const std::string &case_id, const ReproduceOptions &o = {}) {
  std::vector<Check> out;
  const bool all = case_id == "all";
  bool known = all;
  if (all || case_id == "total-1") {
    detail::reproduce_total("total-1", fixtures::total_power_1(), fixtures::kTotal1, out);
    known = true;
  }
  if (all || case_id == "total-2") {
    detail::reproduce_total("total-2", fixtures::total_power_2(), fixtures::kTotal2, out);
    known = true;
  }
  if (all || case_id == "indiv-n4") {
    detail::reproduce_indiv("indiv-n4", fixtures::indiv_n4_R(), fixtures::indiv_n4_Q(), fixtures::kIndivN4, 2e-2,
                            false, o, out);
    known = true;
  }
  if (all || case_id == "indiv-n6") {
    detail::reproduce_indiv("indiv-n6", fixtures::indiv_n6_R(), fixtures::indiv_n6_Q(), fixtures::kIndivN6, 3e-2,
                            true, o, out);
    known = true;
  }
  if (!known) throw InputError("reproduce: unknown case '" + case_id + "' (expected total-1, total-2, indiv-n4, indiv-n6 or all)");
  return out;
}

} // namespace relaybf
