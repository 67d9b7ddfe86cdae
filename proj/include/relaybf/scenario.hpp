#pragma once

// JSON scenarios in, JSON reports out. Complex numbers are [re, im] pairs,
// matrices are row-major arrays of rows. See README for the schema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "relaybf/indiv_diag.hpp"
#include "relaybf/indiv_qcqp.hpp"
#include "relaybf/indiv_search.hpp"
#include "relaybf/oracle.hpp"
#include "relaybf/total_power.hpp"

namespace relaybf {

using json = nlohmann::ordered_json;

struct ExplicitStats {
  RVector D;
  HermitianMatrix R;
  HermitianMatrix Q;
};

struct SolverSpec {
  std::string name = "auto";
  double tol = 1e-8;             // SDP duality gap
  std::int64_t samples = 1'000'000;  // GRP draws
  int p = 1024;                  // p-norm exponent
  double eps = 1e-3;             // coordinate descent stopping threshold
  std::string fallback = "cdm";  // used by "sdp" when the relaxation is not tight and n > 3
};

struct Scenario {
  std::string mode;  // "total" or "individual"
  std::optional<RicianParams> rician;
  std::optional<ExplicitStats> explicit_stats;
  double sigma2 = 1.0;
  double P0 = 0.0;  // total mode
  double Ps = 0.0;  // individual mode
  RVector P;        // individual mode
  SolverSpec solver;
  std::uint64_t seed = 1;
  std::vector<std::string> warnings;

  ChannelStats stats() const {
    if (rician) return build_stats(*rician, sigma2);
    ChannelStats s{explicit_stats->D, explicit_stats->R, explicit_stats->Q, sigma2};
    s.validate();
    return s;
  }
  TotalPowerProblem total_problem() const { return TotalPowerProblem{stats(), P0}; }
  IndivPowerProblem indiv_problem() const { return IndivPowerProblem{stats(), Ps, P}; }
};

inline const std::vector<std::string> &solvers_for(const std::string &mode) {
  static const std::vector<std::string> total{"auto", "total-diag", "newton"};
  static const std::vector<std::string> indiv{"auto", "indiv-diag", "sdp", "cdm", "pnorm", "grp"};
  return mode == "total" ? total : indiv;
}

namespace detail {

[[noreturn]] inline void schema_error(const std::string &field, const std::string &what) {
  throw InputError("scenario field '" + field + "': " + what);
}

inline const json &require(const json &j, const std::string &key, const std::string &path) {
  if (!j.is_object() || !j.contains(key)) schema_error(path + key, "missing");
  return j.at(key);
}

/// Rejects keys outside `allowed`; `path` is the object's own prefix.
inline void only_keys(const json &j, std::initializer_list<std::string_view> allowed, const std::string &path) {
  if (!j.is_object()) return;
  for (const auto &[k, v] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) schema_error(path + k, "unknown field");
}

inline double as_real(const json &j, const std::string &field) {
  if (!j.is_number()) schema_error(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) schema_error(field, "not finite");
  return v;
}

inline Complex as_complex(const json &j, const std::string &field) {
  if (!j.is_array() || j.size() != 2) schema_error(field, "expected an [re, im] pair");
  return Complex(as_real(j[0], field + "[0]"), as_real(j[1], field + "[1]"));
}

inline RVector as_rvector(const json &j, const std::string &field) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a non-empty array of numbers");
  RVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = as_real(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline CVector as_cvector(const json &j, const std::string &field) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a non-empty array of [re, im] pairs");
  CVector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = as_complex(j[i], field + "[" + std::to_string(i) + "]");
  return v;
}

inline HermitianMatrix as_hermitian(const json &j, const std::string &field, std::vector<std::string> &warnings) {
  if (!j.is_array() || j.empty()) schema_error(field, "expected a square array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  CMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row = field + "[" + std::to_string(i) + "]";
    const json &r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != n) schema_error(row, "row length differs from row count");
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = as_complex(r[static_cast<std::size_t>(k)], row + "[" + std::to_string(k) + "]");
  }
  const double asym = max_asymmetry(m);
  if (asym > 1e-6) {
    std::ostringstream os;
    os << "not Hermitian (max |H - H^dagger| = " << asym << ")";
    schema_error(field, os.str());
  }
  if (asym > 1e-9) {
    std::ostringstream os;
    os << field << ": asymmetry " << asym << " symmetrized";
    warnings.push_back(os.str());
  }
  return HermitianMatrix(m);
}

inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const CVector &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v(i)));
  return a;
}

inline json to_json(const RVector &v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline json to_json(const HermitianMatrix &h) {
  json a = json::array();
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < h.size(); ++k) row.push_back(to_json(h(i, k)));
    a.push_back(row);
  }
  return a;
}

} // namespace detail

inline Scenario parse_scenario_json(const json &j) {
  using namespace detail;
  if (!j.is_object()) throw InputError("scenario: top level must be an object");
  Scenario s;
  only_keys(j, {"mode", "channel", "sigma2", "budget", "solver", "seed"}, "");
  const json &mode = require(j, "mode", "");
  if (!mode.is_string() || (mode != "total" && mode != "individual")) schema_error("mode", "expected \"total\" or \"individual\"");
  s.mode = mode.get<std::string>();

  const json &ch = require(j, "channel", "");
  const bool has_r = ch.is_object() && ch.contains("rician");
  const bool has_e = ch.is_object() && ch.contains("explicit");
  if (has_r == has_e) schema_error("channel", "exactly one of \"rician\" or \"explicit\" is required");
  only_keys(ch, {"rician", "explicit"}, "channel.");
  if (has_r) {
    const json &r = ch.at("rician");
    only_keys(r, {"f_mean", "f_var", "g_mean", "g_var"}, "channel.rician.");
    RicianParams p{as_cvector(require(r, "f_mean", "channel.rician."), "channel.rician.f_mean"),
                   as_rvector(require(r, "f_var", "channel.rician."), "channel.rician.f_var"),
                   as_cvector(require(r, "g_mean", "channel.rician."), "channel.rician.g_mean"),
                   as_rvector(require(r, "g_var", "channel.rician."), "channel.rician.g_var")};
    p.validate();
    s.rician = p;
  } else {
    const json &e = ch.at("explicit");
    only_keys(e, {"D", "R", "Q"}, "channel.explicit.");
    ExplicitStats x{as_rvector(require(e, "D", "channel.explicit."), "channel.explicit.D"),
                    as_hermitian(require(e, "R", "channel.explicit."), "channel.explicit.R", s.warnings),
                    as_hermitian(require(e, "Q", "channel.explicit."), "channel.explicit.Q", s.warnings)};
    if (x.R.size() != x.D.size() || x.Q.size() != x.D.size()) schema_error("channel.explicit", "D, R, Q sizes differ");
    s.explicit_stats = x;
  }
  if (j.contains("sigma2")) s.sigma2 = as_real(j.at("sigma2"), "sigma2");
  if (!(s.sigma2 > 0.0)) schema_error("sigma2", "must be positive");

  const json &b = require(j, "budget", "");
  if (!b.is_object()) schema_error("budget", "expected an object");
  if (s.mode == "total") only_keys(b, {"P0"}, "budget.");
  else only_keys(b, {"Ps", "P"}, "budget.");
  if (s.mode == "total") {
    s.P0 = as_real(require(b, "P0", "budget."), "budget.P0");
    if (!(s.P0 > 0.0)) schema_error("budget.P0", "must be positive");
  } else {
    s.Ps = as_real(require(b, "Ps", "budget."), "budget.Ps");
    if (!(s.Ps > 0.0)) schema_error("budget.Ps", "must be positive");
    const json &caps = require(b, "P", "budget.");
    s.P = caps.is_number() ? RVector::Constant(s.stats().size(), as_real(caps, "budget.P")) : as_rvector(caps, "budget.P");
    if (s.P.size() != s.stats().size()) schema_error("budget.P", "need one cap per relay");
    if ((s.P.array() <= 0.0).any()) schema_error("budget.P", "caps must be positive");
  }

  if (j.contains("solver")) {
    const json &sv = j.at("solver");
    if (!sv.is_object()) schema_error("solver", "expected an object");
    only_keys(sv, {"name", "options"}, "solver.");
    if (sv.contains("name")) {
      if (!sv.at("name").is_string()) schema_error("solver.name", "expected a string");
      s.solver.name = sv.at("name").get<std::string>();
    }
    if (sv.contains("options")) {
      const json &o = sv.at("options");
      if (!o.is_object()) schema_error("solver.options", "expected an object");
      for (const auto &[k, v] : o.items()) {
        const std::string f = "solver.options." + k;
        if (k == "tol") s.solver.tol = as_real(v, f);
        else if (k == "samples") s.solver.samples = static_cast<std::int64_t>(as_real(v, f));
        else if (k == "p") s.solver.p = static_cast<int>(as_real(v, f));
        else if (k == "eps") s.solver.eps = as_real(v, f);
        else if (k == "fallback") {
          if (!v.is_string() || (v != "cdm" && v != "pnorm" && v != "grp")) schema_error(f, "expected cdm, pnorm or grp");
          s.solver.fallback = v.get<std::string>();
        } else schema_error(f, "unknown option");
      }
    }
  }
  const auto &valid = solvers_for(s.mode);
  if (std::find(valid.begin(), valid.end(), s.solver.name) == valid.end())
    schema_error("solver.name", "'" + s.solver.name + "' is not a solver for mode " + s.mode);
  if (j.contains("seed")) {
    const json &sd = j.at("seed");
    if (!sd.is_number_unsigned() && !(sd.is_number_integer() && sd.get<std::int64_t>() >= 0))
      schema_error("seed", "expected a non-negative integer");
    s.seed = sd.get<std::uint64_t>();
  }
  return s;
}

inline Scenario parse_scenario(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw InputError("scenario: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception &e) {
    throw InputError("scenario: " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenario_json(j);
}

/// Canonical form: fixed key order, every field written.
inline json serialize(const Scenario &s) {
  using detail::to_json;
  json j;
  j["mode"] = s.mode;
  json ch;
  if (s.rician)
    ch["rician"] = json{{"f_mean", to_json(s.rician->f_mean)},
                        {"f_var", to_json(s.rician->f_var)},
                        {"g_mean", to_json(s.rician->g_mean)},
                        {"g_var", to_json(s.rician->g_var)}};
  else
    ch["explicit"] = json{{"D", to_json(s.explicit_stats->D)},
                          {"R", to_json(s.explicit_stats->R)},
                          {"Q", to_json(s.explicit_stats->Q)}};
  j["channel"] = ch;
  j["sigma2"] = s.sigma2;
  if (s.mode == "total") j["budget"] = json{{"P0", s.P0}};
  else j["budget"] = json{{"Ps", s.Ps}, {"P", to_json(s.P)}};
  j["solver"] = json{{"name", s.solver.name},
                     {"options", json{{"tol", s.solver.tol},
                                      {"samples", s.solver.samples},
                                      {"p", s.solver.p},
                                      {"eps", s.solver.eps},
                                      {"fallback", s.solver.fallback}}}};
  j["seed"] = s.seed;
  return j;
}

struct RunResult {
  json report;
  std::optional<SolverTrace> trace;  // solvers without iterations leave this empty
};

namespace detail {

inline json solution_json(const ChannelStats &st, double Ps, const CVector &w, const RVector *caps) {
  json j;
  j["w"] = to_json(w);
  j["Ps"] = Ps;
  const double v = snr(st, Ps, w);
  j["snr"] = v;
  j["snr_db"] = 10.0 * std::log10(v);
  const auto pw = powers(st, Ps, w);
  j["relay_power_total"] = pw.total;
  j["relay_power"] = to_json(pw.per_relay);
  if (caps) j["slacks"] = to_json(RVector(*caps - pw.per_relay));
  return j;
}

/// Default search start from the relaxation optimum: magnitudes sqrt(X_kk),
/// phases from the column of the largest diagonal entry. Equals the scaled
/// top eigenvector when X has rank one; unlike it, a diagonal X of higher rank
/// does not leave relays at exactly zero, where the gradient vanishes.
inline CVector sdp_start(const SdpSolution &s) {
  const CMatrix &x = s.X.matrix();
  Eigen::Index ref = 0;
  x.diagonal().real().maxCoeff(&ref);
  CVector u(x.rows());
  for (Eigen::Index k = 0; k < x.rows(); ++k) {
    const double mag = std::sqrt(std::max(x(k, k).real(), 0.0));
    const double arg = std::abs(x(k, ref)) > 0.0 ? std::arg(x(k, ref)) : 0.0;
    u(k) = std::polar(mag, arg);
  }
  return u;
}

} // namespace detail

/// Dispatches a scenario to its solver and builds the report body.
inline RunResult run(const Scenario &s) {
  RunResult out;
  json meta;
  json notes = json::array();
  for (const auto &w : s.warnings) notes.push_back("warning: " + w);
  const ChannelStats st = s.stats();
  json sol;

  if (s.mode == "total") {
    const TotalPowerProblem p = s.total_problem();
    const bool diag = build_s_pair(p).is_diagonal();
    std::string used = s.solver.name;
    if (used == "auto") used = diag ? "total-diag" : "newton";
    TotalPowerSolution r = used == "total-diag" ? solve_diagonal(p) : solve(p);
    meta["solver"] = used;
    meta["x"] = r.x;
    meta["lambda_min_G"] = r.lambda_min;
    meta["objective"] = r.objective;
    meta["x_start"] = r.x0;
    meta["iterations"] = r.iterations;
    const Bracket br = bracket_x(build_s_pair(p));
    meta["bracket"] = json::array({br.x_l, br.x_u});
    if (r.used_fallback) meta["fallback"] = "grid + golden-section";
    for (const auto &n : r.trace.notes()) notes.push_back(n);
    sol = detail::solution_json(st, r.Ps, r.w, nullptr);
    sol["budget_used"] = r.Ps + powers(st, r.Ps, r.w).total;
    out.trace = r.trace;
  } else {
    const IndivPowerProblem p = s.indiv_problem();
    std::string used = s.solver.name;
    if (used == "auto") used = st.is_diagonal() ? "indiv-diag" : "sdp";
    meta["solver"] = used;
    CVector w;
    if (used == "indiv-diag") {
      const auto d = solve_diagonal_detailed(p);
      w = d.solution.w;
      meta["t_star"] = d.t_star;
      meta["active_relays"] = static_cast<std::int64_t>(p.size() - static_cast<Eigen::Index>(d.k0));
    } else {
      const QcqpInstance q = build_qcqp(p);
      SdpOptions so;
      so.tol = s.solver.tol;
      std::optional<SdpQcqpResult> relax;
      try {
        relax = solve_via_sdp(p, so);
        meta["relaxation_bound_snr"] = p.Ps / st.sigma2 * relax->sdp.primal_obj;
        meta["relaxation_rank"] = relax->sdp.rank_estimate;
        meta["relaxation_gap"] = relax->sdp.gap;
      } catch (const ConvergenceError &e) {
        if (used == "sdp" || used == "grp") throw;
        notes.push_back(std::string("relaxation unavailable for the start vector: ") + e.what());
      }
      const CVector start = relax ? detail::sdp_start(relax->sdp) : CVector(CVector::Ones(p.size()));
      std::string search = used;
      if (used == "sdp") {
        if (relax->w) {
          w = *relax->w;
          notes.push_back("relaxation is rank one; its top eigenvector is optimal");
        } else if (p.size() <= 3) {
          w = rank_one_decompose(relax->sdp.X, q);
          notes.push_back("relaxation rank " + std::to_string(relax->sdp.rank_estimate) +
                          "; rank-one solution constructed by rank reduction");
        } else {
          search = s.solver.fallback;
          notes.push_back("relaxation rank " + std::to_string(relax->sdp.rank_estimate) + "; fell back to " + search);
          meta["fallback"] = search;
        }
      }
      if (search == "cdm") {
        CoordinateDescentOptions co;
        co.eps = s.solver.eps;
        auto r = coordinate_descent(p, start, co);
        w = r.w_raw;
        meta["iterations"] = r.iterations;
        out.trace = std::move(r.trace);
      } else if (search == "pnorm") {
        auto r = augmented_lagrangian_solve(p, build_pnorm_embedding(p, s.solver.p), start);
        w = r.w_raw;
        meta["iterations"] = r.iterations;
        meta["p"] = s.solver.p;
        meta["multiplier"] = r.state.lambda;
        out.trace = std::move(r.trace);
      } else if (search == "grp") {
        w = grp_extract(relax->sdp.X, q, s.solver.samples, s.seed);
        meta["samples"] = s.solver.samples;
        meta["seed"] = s.seed;
      }
      const auto rs = rescale_to_original(w, q, p);
      w = rs.w;
      meta["qcqp_objective"] = rs.snr * st.sigma2 / p.Ps;
    }
    sol = detail::solution_json(st, p.Ps, w, &p.P);
  }
  out.report["mode"] = s.mode;
  out.report["solution"] = sol;
  out.report["solver"] = meta;
  out.report["assumptions"] = json::array({"w phase fixed: largest-magnitude entry real and positive"});
  out.report["notes"] = notes;
  return out;
}

/// Brute-force reference for a scenario (individual n <= 3, or total-power grid scan).
inline json run_oracle(const Scenario &s, int points = 1000) {
  json j;
  j["mode"] = s.mode;
  if (s.mode == "total") {
    const auto r = brute_force_total(s.total_problem(), points);
    j["oracle"] = json{{"method", "uniform scan of the bracket"}, {"points", points}, {"x", r.x}, {"objective", r.objective}};
  } else {
    const IndivPowerProblem p = s.indiv_problem();
    const GridSpec g = GridSpec::defaults_for(p.size());
    const auto r = brute_force_indiv(p, g);
    j["oracle"] = json{{"method", "polar grid + one coordinate sweep"},
                       {"radial_points", g.radial_points},
                       {"angular_points", g.angular_points},
                       {"grid_snr", r.grid_snr},
                       {"snr", r.snr},
                       {"w", detail::to_json(r.w)}};
  }
  return j;
}

/// Iteration history carried by a convergence failure, when the solver kept one.
inline std::optional<SolverTrace> partial_trace(const ConvergenceError &e) {
  if (const auto *s = dynamic_cast<const SearchConvergenceError *>(&e)) return s->trace();
  if (const auto *t = dynamic_cast<const TotalPowerConvergenceError *>(&e)) return t->best().trace;
  return std::nullopt;
}

inline json trace_json(const SolverTrace &t) {
  json j;
  j["columns"] = t.columns();
  j["rows"] = t.rows();
  j["notes"] = t.notes();
  return j;
}

inline SolverTrace trace_from_json(const json &j) {
  if (!j.is_object() || !j.contains("columns") || !j.contains("rows")) throw InputError("trace: expected columns and rows");
  SolverTrace t(j.at("columns").get<std::vector<std::string>>());
  for (const auto &r : j.at("rows")) t.add(r.get<std::vector<double>>());
  if (j.contains("notes"))
    for (const auto &n : j.at("notes")) t.note(n.get<std::string>());
  return t;
}

} // namespace relaybf
