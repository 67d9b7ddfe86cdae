#pragma once

// Brute-force and finite-difference references. Nothing here shares code
// paths with the solvers it checks beyond the SNR/power formulas themselves.

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <sstream>
#include <vector>

#include "relaybf/channel.hpp"
#include "relaybf/indiv_search.hpp"
#include "relaybf/total_power.hpp"

namespace relaybf {

struct GridSpec {
  int radial_points = 60;
  int angular_points = 72;

  static constexpr double kMaxEvaluations = 1e8;

  /// 60 x 72 for n <= 2; n = 3 would need 60^3 * 72^2 > 1e8 points, so it drops to 20 x 30.
  static GridSpec defaults_for(Eigen::Index n) { return n >= 3 ? GridSpec{20, 30} : GridSpec{60, 72}; }

  double evaluations(Eigen::Index n) const {
    return std::pow(static_cast<double>(radial_points), static_cast<double>(n)) *
           std::pow(static_cast<double>(angular_points), static_cast<double>(n - 1));
  }
};

struct OracleIndivResult {
  CVector w;
  double snr = 0.0;
  double grid_snr = 0.0;  // before the polish sweep
};

/// Exhaustive polar grid over every w_k (|w_k| in [0, beta_k] endpoints
/// included; w_1 real by phase invariance), then one coordinate sweep.
inline OracleIndivResult brute_force_indiv(const IndivPowerProblem &p, const GridSpec &g) {
  p.validate();
  const Eigen::Index n = p.size();
  if (n > 3) throw ScopeError("brute_force_indiv: only n <= 3 is supported");
  if (g.radial_points < 2 || g.angular_points < 1) throw InputError("brute_force_indiv: grid too small");
  if (g.evaluations(n) > GridSpec::kMaxEvaluations) {
    std::ostringstream os;
    os << "brute_force_indiv: " << g.evaluations(n) << " grid points exceed the " << GridSpec::kMaxEvaluations
       << " budget; use a coarser grid";
    throw InputError(os.str());
  }
  const RVector beta = p.scale_coeffs().cwiseInverse().cwiseSqrt();

  // Per-slot candidate values.
  std::vector<std::vector<Complex>> cand(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const int phases = k == 0 ? 1 : g.angular_points;
    for (int i = 0; i < g.radial_points; ++i) {
      const double r = beta(k) * i / (g.radial_points - 1);
      for (int j = 0; j < phases; ++j) {
        cand[k].push_back(std::polar(r, 2.0 * std::numbers::pi * j / phases));
        if (r == 0.0) break;
      }
    }
  }
  const CMatrix &R = p.stats.R.matrix();
  const CMatrix &Q = p.stats.Q.matrix();
  const double scale = p.Ps / p.stats.sigma2;
  CVector w = CVector::Zero(n), best = CVector::Zero(n);
  double best_v = -1.0;
  std::vector<std::size_t> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    for (Eigen::Index k = 0; k < n; ++k) w(k) = cand[k][idx[k]];
    const double v = scale * (w.dot(R * w)).real() / (1.0 + (w.dot(Q * w)).real());
    if (v > best_v) best_v = v, best = w;
    Eigen::Index k = n - 1;
    while (k >= 0 && ++idx[k] == cand[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }

  OracleIndivResult out;
  out.grid_snr = best_v;
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex old = best(k);
    const double before = snr(p.stats, p.Ps, best);
    best(k) = solve_scalar_subproblem(extract_coefficients(p, best, k)).y;
    if (snr(p.stats, p.Ps, best) < before) best(k) = old;
  }
  if ((per_relay_slacks(p.stats, p.Ps, p.P, best).array() < -1e-9 * p.P.array()).any())
    throw ModelError("brute_force_indiv: oracle point violates a per-relay cap");
  out.w = best;
  out.snr = snr(p.stats, p.Ps, best);
  return out;
}

inline OracleIndivResult brute_force_indiv(const IndivPowerProblem &p) {
  return brute_force_indiv(p, GridSpec::defaults_for(p.size()));
}

struct OracleTotalResult {
  double x = 0.0;
  double objective = 0.0;
};

/// Uniform scan of (P0/sigma^2) / lambda_min(G(x)) over `points` nodes of [x_l, x_u].
inline OracleTotalResult brute_force_total(const TotalPowerProblem &p, int points) {
  if (points < 10) throw InputError("brute_force_total: need at least 10 points");
  const SPair s = build_s_pair(p);
  const Bracket br = bracket_x(s);
  const double scale = p.P0 / p.stats.sigma2;
  OracleTotalResult out{br.x_l, -1.0};
  for (int i = 0; i < points; ++i) {
    const double x = br.x_l + (br.x_u - br.x_l) * i / (points - 1);
    if (!(x > 0.0 && x < 1.0)) continue;
    const double v = scale / lambda_min_g(s, x).value;
    if (v > out.objective) out = OracleTotalResult{x, v};
  }
  return out;
}

// Central differences.

inline double finite_diff(const std::function<double(double)> &f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline double finite_diff2(const std::function<double(double)> &f, double x, double h) {
  return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline RVector finite_diff_gradient(const std::function<double(const RVector &)> &f, const RVector &x, double h) {
  RVector g(x.size());
  RVector xp = x, xm = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
    xp(i) = xm(i) = x(i);
  }
  return g;
}

/// Jacobian of a vector field by central differences, symmetrized (used on gradients).
inline RMatrix finite_diff_jacobian(const std::function<RVector(const RVector &)> &g, const RVector &x, double h) {
  const Eigen::Index n = x.size();
  RMatrix j(n, n);
  RVector xp = x, xm = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    xp(i) = x(i) + h;
    xm(i) = x(i) - h;
    j.col(i) = (g(xp) - g(xm)) / (2.0 * h);
    xp(i) = xm(i) = x(i);
  }
  return 0.5 * (j + j.transpose());
}

} // namespace relaybf
