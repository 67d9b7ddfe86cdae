#pragma once

// SNR maximization under a joint source + relay power budget
//   Ps + Ps w'Dw + sigma^2 w'w <= P0.
// With x = Ps / P0 the problem collapses to the scalar search
//   max_x (P0/sigma^2) / lambda_min(G(x)),   G(x) = S1/(1-x) + S2/x,
// and the weights are recovered from the bottom eigenvector of G.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "relaybf/channel.hpp"
#include "relaybf/trace.hpp"

namespace relaybf {

struct TotalPowerProblem {
  ChannelStats stats;
  double P0 = 0.0;

  void validate() const {
    stats.validate();
    if (!(P0 > 0.0) || !std::isfinite(P0)) throw InputError("TotalPowerProblem: P0 must be positive");
  }
};

struct SPair {
  HermitianMatrix S1;
  HermitianMatrix S2;
  HermitianMatrix r_inv_sqrt;  // R^{-1/2}, maps eigenvectors of G back to weights

  bool is_diagonal(double rel_tol = 1e-12) const { return S1.is_diagonal(rel_tol) && S2.is_diagonal(rel_tol); }
};

struct Bracket {
  double x_l = 0.0;
  double x_u = 0.0;
};

struct GEig {
  double value = 0.0;
  CVector u0;
  double gap = 0.0;
};

struct EigDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

struct TotalPowerSolution {
  double x = 0.0;
  double Ps = 0.0;
  CVector w;
  double snr = 0.0;
  double lambda_min = 0.0;  // of G(x)
  double objective = 0.0;   // (P0/sigma^2) / lambda_min
  double x0 = 0.0;
  int iterations = 0;
  bool used_fallback = false;
  SolverTrace trace{{"k", "x", "lambda_min", "d1", "d2", "step"}};
};

struct NewtonOptions {
  double step_tol = 1e-3;  // |dx / x|
  double d1_tol = 1e-3;    // |d lambda_min / dx|
  int max_iter = 100;
  double gap_tol = 1e-8;   // relative to ||G||
};

class TotalPowerConvergenceError : public ConvergenceError {
public:
  TotalPowerConvergenceError(const std::string &what, TotalPowerSolution best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const TotalPowerSolution &best() const noexcept { return best_; }

private:
  TotalPowerSolution best_;
};

inline SPair build_s_pair(const TotalPowerProblem &p) {
  p.validate();
  const auto &s = p.stats;
  const auto er = hermitian_eig(s.R);
  if (!(er.min() > 1e-10)) {
    std::ostringstream os;
    os << "build_s_pair: R is singular (lambda_min = " << er.min()
       << "); the lambda_max reformulation for singular R is not implemented";
    throw SingularityError(os.str(), er.min());
  }
  const HermitianMatrix ris = spectral_map(er, [](double l) { return 1.0 / std::sqrt(l); });
  const HermitianMatrix rinv = spectral_map(er, [](double l) { return 1.0 / l; });
  const double nr = s.sigma2 / p.P0;
  const HermitianMatrix s1 = HermitianMatrix::diagonal(s.D).congruence(ris.matrix()) + nr * rinv;
  const HermitianMatrix s2 = s.Q.congruence(ris.matrix()) + nr * rinv;
  return SPair{s1, s2, ris};
}

inline Bracket bracket_x(const SPair &s) {
  const HermitianMatrix m = s.S2.congruence(psd_inv_sqrt(s.S1).matrix());
  const auto e = hermitian_eig(m);
  const double c = std::max(e.min(), 0.0);
  const double d = std::max(e.max(), 0.0);
  return Bracket{std::sqrt(c) / (1.0 + std::sqrt(c)), std::sqrt(d) / (1.0 + std::sqrt(d))};
}

inline HermitianMatrix g_matrix(const SPair &s, double x) { return (1.0 / (1.0 - x)) * s.S1 + (1.0 / x) * s.S2; }

inline GEig lambda_min_g(const SPair &s, double x) {
  if (!(x > 0.0 && x < 1.0)) throw InputError("lambda_min_g: x must lie in (0, 1)");
  const auto e = hermitian_eig(g_matrix(s, x));
  GEig out;
  out.value = e.min();
  out.u0 = e.vector(0);
  out.gap = e.size() > 1 ? e.eigenvalues(1) - e.eigenvalues(0) : std::numeric_limits<double>::infinity();
  return out;
}

/// First and second derivatives of lambda_min(G(x)) from the eigen-perturbation formulas.
inline EigDerivatives eig_derivatives(const SPair &s, double x, double gap_tol = 1e-8) {
  if (!(x > 0.0 && x < 1.0)) throw InputError("eig_derivatives: x must lie in (0, 1)");
  const HermitianMatrix g = g_matrix(s, x);
  const auto e = hermitian_eig(g);
  const Eigen::Index n = e.size();
  if (n > 1) {
    const double gap = e.eigenvalues(1) - e.eigenvalues(0);
    if (!(gap > gap_tol * g.norm())) throw DegeneracyError("eig_derivatives: lambda_min(G) is not simple", gap);
  }
  const double a = 1.0 - x;
  const CMatrix g1 = s.S1.matrix() / (a * a) - s.S2.matrix() / (x * x);
  const CMatrix g2 = 2.0 * s.S1.matrix() / (a * a * a) + 2.0 * s.S2.matrix() / (x * x * x);
  const CVector u0 = e.vector(0);
  const CVector g1u = g1 * u0;
  EigDerivatives d;
  d.d1 = u0.dot(g1u).real();
  d.d2 = u0.dot(g2 * u0).real();
  for (Eigen::Index j = 1; j < n; ++j)
    d.d2 -= 2.0 * std::norm(e.vector(j).dot(g1u)) / (e.eigenvalues(j) - e.eigenvalues(0));
  return d;
}

namespace detail {

/// Weights for a given x: w = c R^{-1/2} u0 with c saturating the budget.
inline void finish_total(const TotalPowerProblem &p, const SPair &s, TotalPowerSolution &sol) {
  const GEig ge = lambda_min_g(s, sol.x);
  const CVector v = s.r_inv_sqrt.matrix() * ge.u0;
  sol.Ps = sol.x * p.P0;
  const double denom = sol.Ps * v.cwiseAbs2().dot(p.stats.D) + p.stats.sigma2 * v.squaredNorm();
  sol.w = fix_phase(v * std::sqrt((p.P0 - sol.Ps) / denom));
  sol.lambda_min = ge.value;
  sol.objective = (p.P0 / p.stats.sigma2) / ge.value;
  sol.snr = snr(p.stats, sol.Ps, sol.w);
}

inline double total_objective(const SPair &s, double P0_over_sigma2, double x) {
  return P0_over_sigma2 / lambda_min_g(s, x).value;
}

/// Derivative-free minimization of lambda_min(G) on [lo, hi]: 100-point scan,
/// then golden section on the best cell.
inline double grid_golden(const SPair &s, double lo, double hi) {
  constexpr int kPoints = 100;
  const double h = (hi - lo) / (kPoints - 1);
  int best = 0;
  double best_v = lambda_min_g(s, lo).value;
  for (int i = 1; i < kPoints; ++i) {
    const double v = lambda_min_g(s, lo + i * h).value;
    if (v < best_v) best_v = v, best = i;
  }
  double a = lo + std::max(best - 1, 0) * h;
  double b = lo + std::min(best + 1, kPoints - 1) * h;
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = lambda_min_g(s, c).value, fd = lambda_min_g(s, d).value;
  while (b - a > 1e-12 * std::max(1.0, std::abs(a))) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - invphi * (b - a);
      fc = lambda_min_g(s, c).value;
    } else {
      a = c, c = d, fc = fd;
      d = a + invphi * (b - a);
      fd = lambda_min_g(s, d).value;
    }
  }
  return 0.5 * (a + b);
}

} // namespace detail

/// Closed form when S1, S2 are diagonal with entries a_k, b_k:
/// x = sqrt(b)/(sqrt(a)+sqrt(b)) at k0 = argmin (sqrt(a_k)+sqrt(b_k))^2.
inline TotalPowerSolution solve_diagonal(const TotalPowerProblem &p) {
  const SPair s = build_s_pair(p);
  if (!s.is_diagonal()) throw DispatchError("total_power::solve_diagonal: S1, S2 not diagonal; use newton_solve");
  const RVector a = s.S1.diag();
  const RVector b = s.S2.diag();
  Eigen::Index k0 = 0;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double v = std::pow(std::sqrt(a(k)) + std::sqrt(b(k)), 2);
    if (v < best) best = v, k0 = k;
  }
  TotalPowerSolution sol;
  sol.x = sol.x0 = std::sqrt(b(k0)) / (std::sqrt(a(k0)) + std::sqrt(b(k0)));
  const CVector v = s.r_inv_sqrt.matrix().col(k0);
  sol.Ps = sol.x * p.P0;
  const double denom = sol.Ps * v.cwiseAbs2().dot(p.stats.D) + p.stats.sigma2 * v.squaredNorm();
  sol.w = fix_phase(v * std::sqrt((p.P0 - sol.Ps) / denom));
  sol.lambda_min = best;
  sol.objective = (p.P0 / p.stats.sigma2) / best;
  sol.snr = snr(p.stats, sol.Ps, sol.w);
  return sol;
}

/// Bracketed Newton on lambda_min(G(x)) started at x0. Steps are halved only
/// to stay inside [x_l, x_u]; a near-degenerate spectrum switches to a grid
/// plus golden-section search.
inline TotalPowerSolution newton_solve(const TotalPowerProblem &p, double x0, const NewtonOptions &opts = {}) {
  const SPair s = build_s_pair(p);
  const Bracket br = bracket_x(s);
  const double slack = 1e-12;
  if (x0 < br.x_l - slack || x0 > br.x_u + slack) {
    std::ostringstream os;
    os << "newton_solve: x0 = " << x0 << " outside [" << br.x_l << ", " << br.x_u << "]";
    throw InputError(os.str());
  }
  TotalPowerSolution sol;
  sol.x0 = x0;
  double x = std::clamp(x0, br.x_l, br.x_u);
  const double width = br.x_u - br.x_l;

  auto fallback = [&](const std::string &why) {
    sol.used_fallback = true;
    sol.trace.note(why + "; switched to grid + golden-section search on the bracket");
    sol.x = width > 0.0 ? detail::grid_golden(s, br.x_l, br.x_u) : br.x_l;
    detail::finish_total(p, s, sol);
    return sol;
  };

  if (width <= 1e-14) {
    sol.x = x;
    detail::finish_total(p, s, sol);
    sol.trace.add({0.0, x, sol.lambda_min, 0.0, 0.0, 0.0});
    return sol;
  }

  for (int k = 0;; ++k) {
    EigDerivatives d;
    try {
      d = eig_derivatives(s, x, opts.gap_tol);
    } catch (const DegeneracyError &e) {
      std::ostringstream os;
      os << "degenerate spectrum at x = " << x << " (gap " << e.gap() << ")";
      return fallback(os.str());
    }
    const double lam = lambda_min_g(s, x).value;
    // Newton needs d2 > 0; otherwise take a bounded descent step.
    const double curvature = d.d2 > 0.0 ? d.d2 : std::max(std::abs(d.d2), std::abs(d.d1) / (0.25 * width));
    const double full = curvature > 0.0 ? -d.d1 / curvature : 0.0;
    double alpha = 1.0;
    for (int h = 0; h < 60 && (x + alpha * full < br.x_l || x + alpha * full > br.x_u); ++h) alpha *= 0.5;
    const double xn = std::clamp(x + alpha * full, br.x_l, br.x_u);
    const double step = xn - x;
    sol.trace.add({static_cast<double>(k), x, lam, d.d1, d.d2, step});
    const bool small_step = std::abs(step) < opts.step_tol * std::abs(x);
    x = xn;
    sol.iterations = k + 1;
    if (small_step && std::abs(d.d1) < opts.d1_tol) break;
    if (sol.iterations >= opts.max_iter) {
      sol.x = x;
      detail::finish_total(p, s, sol);
      throw TotalPowerConvergenceError("newton_solve: iteration budget exhausted", sol);
    }
  }
  sol.x = x;
  detail::finish_total(p, s, sol);
  return sol;
}

/// Newton from x_l, x_u and the best point of a 100-point scan, keeping the
/// largest objective (ties toward smaller x).
inline TotalPowerSolution newton_multistart(const TotalPowerProblem &p, const NewtonOptions &opts = {}) {
  const SPair s = build_s_pair(p);
  const Bracket br = bracket_x(s);
  std::vector<double> starts{br.x_l, br.x_u};
  if (br.x_u - br.x_l > 1e-14) {
    constexpr int kPoints = 100;
    double best_x = br.x_l, best_v = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kPoints; ++i) {
      const double x = br.x_l + (br.x_u - br.x_l) * i / (kPoints - 1);
      const double v = lambda_min_g(s, x).value;
      if (v < best_v) best_v = v, best_x = x;
    }
    starts.push_back(best_x);
  }
  TotalPowerSolution best;
  bool have = false;
  for (double x0 : starts) {
    TotalPowerSolution r = newton_solve(p, x0, opts);
    const double tol = 1e-12 * std::abs(r.objective);
    if (!have || r.objective > best.objective + tol ||
        (std::abs(r.objective - best.objective) <= tol && r.x < best.x)) {
      best = std::move(r);
      have = true;
    }
  }
  return best;
}

/// Diagonal instances use the closed form, everything else newton_multistart.
inline TotalPowerSolution solve(const TotalPowerProblem &p, const NewtonOptions &opts = {}) {
  if (build_s_pair(p).is_diagonal()) return solve_diagonal(p);
  return newton_multistart(p, opts);
}

} // namespace relaybf
