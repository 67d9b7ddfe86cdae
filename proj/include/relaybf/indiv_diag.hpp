#pragma once

// Per-relay budgets with diagonal R and Q. The SNR is then a ratio of two
// separable sums in |w_k|^2 and Dinkelbach's parametric function
//   F(t) = -t + sum_k c_k max(0, (Ps/sigma^2) r_k - t q_k),   c_k = P_k / (Ps D_kk + sigma^2)
// is piecewise linear, so its root follows in closed form once the active set is known.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "relaybf/channel.hpp"

namespace relaybf {

struct DinkelbachState {
  double t = 0.0;
  double F_value = 0.0;
  RVector w_squared;
};

namespace detail {

inline void require_diagonal(const IndivPowerProblem &p, const char *who) {
  if (!p.stats.is_diagonal()) throw DispatchError(std::string(who) + ": R and Q must be diagonal");
}

} // namespace detail

inline DinkelbachState dinkelbach_F(const IndivPowerProblem &p, double t) {
  p.validate();
  detail::require_diagonal(p, "dinkelbach_F");
  const RVector c = p.scale_coeffs().cwiseInverse();
  const RVector r = p.stats.R.diag();
  const RVector q = p.stats.Q.diag();
  const double snr_scale = p.Ps / p.stats.sigma2;
  DinkelbachState st;
  st.t = t;
  st.F_value = -t;
  st.w_squared = RVector::Zero(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double arg = snr_scale * r(k) - t * q(k);
    if (arg > 0.0) {
      st.F_value += c(k) * arg;
      st.w_squared(k) = c(k);
    }
  }
  return st;
}

/// Break points t_k = Ps r_k / (sigma^2 q_k); +inf when q_k = 0 < r_k, 0 when r_k = 0.
inline RVector dinkelbach_breakpoints(const IndivPowerProblem &p) {
  const RVector r = p.stats.R.diag();
  const RVector q = p.stats.Q.diag();
  RVector t(p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (r(k) <= 0.0) t(k) = 0.0;
    else if (q(k) <= 0.0) t(k) = std::numeric_limits<double>::infinity();
    else t(k) = p.Ps * r(k) / (p.stats.sigma2 * q(k));
  }
  return t;
}

struct DiagonalIndivSolution {
  BeamformingSolution solution;
  double t_star = 0.0;
  std::vector<Eigen::Index> order;  // relays sorted by break point
  std::size_t k0 = 0;               // position in `order` of the first active relay
};

/// Exact optimum: with relays sorted by break point, k0 is the first position
/// where F turns non-positive; relays from k0 on transmit at full power.
inline DiagonalIndivSolution solve_diagonal_detailed(const IndivPowerProblem &p) {
  p.validate();
  detail::require_diagonal(p, "indiv_diag::solve_diagonal");
  const Eigen::Index n = p.size();
  const RVector r = p.stats.R.diag();
  const RVector q = p.stats.Q.diag();
  if (r.maxCoeff() <= 0.0) throw DegeneracyError("indiv_diag: all r_k are zero, the SNR is identically zero", 0.0);

  const RVector t = dinkelbach_breakpoints(p);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return t(a) < t(b); });

  std::size_t k0 = order.size() - 1;
  bool exact = false;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double ti = t(order[i]);
    if (!std::isfinite(ti)) {
      k0 = i;
      break;
    }
    const double f = dinkelbach_F(p, ti).F_value;
    if (f <= 0.0) {
      k0 = i;
      exact = f == 0.0;
      break;
    }
  }

  const RVector c = p.scale_coeffs().cwiseInverse();
  const double snr_scale = p.Ps / p.stats.sigma2;
  double num = 0.0, den = 1.0;
  for (std::size_t i = k0; i < order.size(); ++i) {
    const auto k = order[i];
    num += c(k) * snr_scale * r(k);
    den += c(k) * q(k);
  }
  DiagonalIndivSolution out;
  out.t_star = exact ? t(order[k0]) : num / den;
  out.order = order;
  out.k0 = exact ? k0 + 1 : k0;

  CVector w = CVector::Zero(n);
  for (std::size_t i = out.k0; i < order.size(); ++i) w(order[i]) = std::sqrt(c(order[i]));
  auto &s = out.solution;
  s.w = w;
  s.Ps = p.Ps;
  s.snr = snr(p.stats, p.Ps, w);
  s.slacks = per_relay_slacks(p.stats, p.Ps, p.P, w);
  return out;
}

inline BeamformingSolution solve_diagonal(const IndivPowerProblem &p) { return solve_diagonal_detailed(p).solution; }

} // namespace relaybf
