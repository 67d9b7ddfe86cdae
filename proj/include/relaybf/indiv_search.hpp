#pragma once

// Search solvers for per-relay budgets with general R, Q:
//  * coordinate descent, each slot solved exactly as a constrained scalar
//    fractional program;
//  * the min-max reformulation  min u'Q1u + ||u||_inf^2  s.t. u'R1u = 1  with
//    ||u||_inf^2 smoothed by ||u||_2p^2, solved by an augmented Lagrangian
//    with modified-Newton inner minimization.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relaybf/channel.hpp"
#include "relaybf/indiv_qcqp.hpp"
#include "relaybf/trace.hpp"

namespace relaybf {

// ---------------------------------------------------------------------------
// Scalar subproblem
//   max_y (a1|y|^2 + 2Re(b1 y) + c1) / (a2|y|^2 + 2Re(b2 y) + c2)   s.t. |y| <= beta

struct ScalarFractionalSubproblem {
  double a1 = 0.0, a2 = 0.0;
  Complex b1, b2;
  double c1 = 0.0, c2 = 1.0;
  double beta = 0.0;

  double numerator(Complex y) const { return a1 * std::norm(y) + 2.0 * (b1 * y).real() + c1; }
  double denominator(Complex y) const { return a2 * std::norm(y) + 2.0 * (b2 * y).real() + c2; }
  double value(Complex y) const { return numerator(y) / denominator(y); }
};

enum class SubproblemBranch { Constant, Boundary, Interior };

struct ScalarSolution {
  Complex y;
  double t = 0.0;
  SubproblemBranch branch = SubproblemBranch::Boundary;
  bool constant_flag() const { return branch == SubproblemBranch::Constant; }
};

/// Coefficients of the SNR ratio (without the Ps/sigma^2 factor) as a function
/// of w_k with every other entry frozen. Numerator terms come from R and
/// denominator terms from Q.
inline ScalarFractionalSubproblem extract_coefficients(const IndivPowerProblem &p, const CVector &w, Eigen::Index k) {
  const Eigen::Index n = p.size();
  if (k < 0 || k >= n) throw InputError("extract_coefficients: slot out of range");
  if (w.size() != n) throw InputError("extract_coefficients: dimension mismatch");
  CVector rest = w;
  rest(k) = 0.0;
  const CMatrix &r = p.stats.R.matrix();
  const CMatrix &q = p.stats.Q.matrix();
  ScalarFractionalSubproblem s;
  s.a1 = r(k, k).real();
  s.a2 = q(k, k).real();
  s.b1 = rest.dot(r.col(k));  // rest' R e_k
  s.b2 = rest.dot(q.col(k));
  s.c1 = p.stats.R.quad(rest);
  s.c2 = 1.0 + p.stats.Q.quad(rest);
  s.beta = std::sqrt(p.P(k) / (p.Ps * p.stats.D(k) + p.stats.sigma2));
  return s;
}

namespace detail {

/// Real roots of a t^2 + b t + c = 0, tolerating a vanishing leading term.
inline std::vector<double> real_roots(double a, double b, double c) {
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return {};
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) <= 1e-14 * scale) return {};
    return {-c / b};
  }
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    if (disc > -1e-12 * b * b) disc = 0.0;
    else return {};
  }
  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (b + std::copysign(sq, b));
  std::vector<double> out;
  if (qq != 0.0) out.push_back(qq / a), out.push_back(c / qq);
  else out.push_back(-b / (2.0 * a));
  return out;
}

/// Best |y| and phase for fixed t, plus the value F(t) = max_y num - t den.
struct InnerMax {
  Complex y;
  double F = 0.0;
  SubproblemBranch branch = SubproblemBranch::Boundary;
};

inline InnerMax inner_max(const ScalarFractionalSubproblem &s, double t) {
  const double lead = s.a1 - t * s.a2;
  const Complex b = s.b1 - t * s.b2;
  const double mb = std::abs(b);
  const double base = s.c1 - t * s.c2;
  // Phase -arg(b) makes 2Re(b y) = 2|b||y|.
  const Complex phase = mb > 0.0 ? std::conj(b) / mb : Complex(1.0, 0.0);
  InnerMax out;
  double r = s.beta;
  if (lead < 0.0 && mb < -lead * s.beta) {
    r = mb / -lead;
    out.branch = SubproblemBranch::Interior;
  }
  out.y = r * phase;
  out.F = lead * r * r + 2.0 * mb * r + base;
  return out;
}

} // namespace detail

/// Global maximizer of the scalar fractional program. The optimal value t is
/// the unique root of the decreasing function F(t) = max_y num(y) - t den(y);
/// the root comes from the boundary quadratic (|y| = beta) or the interior
/// quadratic, each checked against its validity conditions. Bisection on F
/// backs both up.
inline ScalarSolution solve_scalar_subproblem(const ScalarFractionalSubproblem &s) {
  if (!(s.beta >= 0.0)) throw InputError("solve_scalar_subproblem: beta must be non-negative");
  if (!(s.c2 > 0.0)) throw InputError("solve_scalar_subproblem: denominator must be positive at y = 0");
  const double scale = std::max({std::abs(s.a1), std::abs(s.c1), std::abs(s.b1), 1e-300});

  // Numerator proportional to denominator: every feasible y is optimal.
  const double t0 = s.c1 / s.c2;
  if (std::abs(s.a1 - t0 * s.a2) <= 1e-12 * scale && std::abs(s.b1 - t0 * s.b2) <= 1e-12 * scale)
    return ScalarSolution{Complex(0.0, 0.0), t0, SubproblemBranch::Constant};
  if (s.beta == 0.0) return ScalarSolution{Complex(0.0, 0.0), t0, SubproblemBranch::Boundary};

  std::vector<double> candidates;
  const double beta2 = s.beta * s.beta;
  const double nb1 = std::norm(s.b1), nb2 = std::norm(s.b2), re12 = (s.b1 * std::conj(s.b2)).real();
  {
    // (a1 - t a2) beta^2 + 2|b1 - t b2| beta + c1 - t c2 = 0, squared.
    const double al0 = s.a1 * beta2 + s.c1, al1 = s.a2 * beta2 + s.c2;
    for (double t : detail::real_roots(4.0 * beta2 * nb2 - al1 * al1, -8.0 * beta2 * re12 + 2.0 * al0 * al1,
                                       4.0 * beta2 * nb1 - al0 * al0))
      if (t * al1 - al0 >= -1e-12 * std::max(1.0, std::abs(al0)) &&
          std::abs(s.b1 - t * s.b2) >= (t * s.a2 - s.a1) * s.beta * (1.0 - 1e-12))
        candidates.push_back(t);
  }
  {
    // |b1 - t b2|^2 = (a1 - t a2)(c1 - t c2).
    for (double t : detail::real_roots(nb2 - s.a2 * s.c2, -2.0 * re12 + s.a1 * s.c2 + s.a2 * s.c1, nb1 - s.a1 * s.c1))
      if (t * s.a2 - s.a1 > 0.0 && std::abs(s.b1 - t * s.b2) < (t * s.a2 - s.a1) * s.beta * (1.0 + 1e-12))
        candidates.push_back(t);
  }

  auto residual = [&](double t) { return std::abs(detail::inner_max(s, t).F); };
  const double ftol = 1e-9 * std::max(1.0, std::abs(s.c2) * std::max(1.0, std::abs(t0)) + scale);
  std::optional<double> root;
  for (double t : candidates)
    if (std::isfinite(t) && residual(t) <= ftol && (!root || residual(t) < residual(*root))) root = t;

  if (!root) {
    // F is strictly decreasing with F(c1/c2) >= 0.
    double lo = t0, hi = std::max(std::abs(t0), 1.0);
    while (detail::inner_max(s, hi).F > 0.0) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
      const double mid = 0.5 * (lo + hi);
      (detail::inner_max(s, mid).F > 0.0 ? lo : hi) = mid;
    }
    root = 0.5 * (lo + hi);
  }
  const auto im = detail::inner_max(s, *root);
  ScalarSolution out{im.y, s.value(im.y), im.branch};
  // Never report worse than leaving y at zero.
  if (s.value(Complex(0.0, 0.0)) > out.t) out = ScalarSolution{Complex(0.0, 0.0), t0, SubproblemBranch::Interior};
  return out;
}

// ---------------------------------------------------------------------------
// Coordinate descent

struct SearchResult {
  BeamformingSolution solution;  // rescaled so the tightest cap is active
  CVector w_raw;                 // iterate before the final rescale
  double qcqp_objective = 0.0;   // w'Rw after scaling to max_k w'A_k w = 1
  int iterations = 0;
  SolverTrace trace;
};

class SearchConvergenceError : public ConvergenceError {
public:
  SearchConvergenceError(const std::string &what, SolverTrace trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const SolverTrace &trace() const noexcept { return trace_; }

private:
  SolverTrace trace_;
};

struct CoordinateDescentOptions {
  double eps = 1e-3;  // relative iterate change between sweeps
  int max_sweeps = 500;
};

/// Scales w down so every per-relay cap holds.
inline CVector project_to_caps(const IndivPowerProblem &p, const CVector &w) {
  const double eta = (p.scale_coeffs().array() * w.cwiseAbs2().array()).maxCoeff();
  return eta > 1.0 ? CVector(w / std::sqrt(eta)) : w;
}

namespace detail {

inline SearchResult finish_search(const IndivPowerProblem &p, const CVector &w, SolverTrace trace, int iterations) {
  const QcqpInstance q = build_qcqp(p);
  SearchResult out;
  out.w_raw = w;
  out.solution = rescale_to_original(w, q, p);
  out.qcqp_objective = qcqp_objective(q, scale_to_qcqp_boundary(q, w));
  out.iterations = iterations;
  out.trace = std::move(trace);
  return out;
}

} // namespace detail

inline SearchResult coordinate_descent(const IndivPowerProblem &p, const CVector &w0,
                                       const CoordinateDescentOptions &opts = {}) {
  p.validate();
  if (w0.size() != p.size()) throw InputError("coordinate_descent: start vector has wrong length");
  require_finite(w0, "coordinate_descent start");
  if (w0.squaredNorm() == 0.0) throw InputError("coordinate_descent: start vector is zero");
  SolverTrace trace({"sweep", "slot", "objective"});
  CVector w = project_to_caps(p, w0);
  trace.add({0.0, -1.0, snr(p.stats, p.Ps, w)});
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    const CVector prev = w;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const auto sol = solve_scalar_subproblem(extract_coefficients(p, w, k));
      const Complex old = w(k);
      const double before = snr(p.stats, p.Ps, w);
      w(k) = sol.y;
      // The subproblem is solved globally; keep the old value on round-off ties.
      if (snr(p.stats, p.Ps, w) < before) w(k) = old;
      trace.add({static_cast<double>(sweep), static_cast<double>(k), snr(p.stats, p.Ps, w)});
    }
    if ((w - prev).norm() < opts.eps * prev.norm()) return detail::finish_search(p, w, std::move(trace), sweep);
  }
  throw SearchConvergenceError("coordinate_descent: no convergence within the sweep budget", std::move(trace));
}

/// Largest single-slot SNR improvement available at w (zero at a coordinate-wise stationary point).
inline double coordinate_improvement(const IndivPowerProblem &p, const CVector &w) {
  const double base = snr(p.stats, p.Ps, w);
  double best = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    CVector v = w;
    v(k) = solve_scalar_subproblem(extract_coefficients(p, w, k)).y;
    best = std::max(best, snr(p.stats, p.Ps, v) - base);
  }
  return best;
}

// ---------------------------------------------------------------------------
// p-norm smoothing + augmented Lagrangian

struct PnormEmbedding {
  RVector D1;  // diag sqrt((Ps D_kk + sigma^2) / P_k), u = D1 w
  HermitianMatrix Q1, R1;
  RMatrix F, K;
  int p = 1;

  Eigen::Index relays() const { return D1.size(); }
  /// z' Jt_k z = |u_k|^2.
  double slot(const RVector &z, Eigen::Index k) const {
    const Eigen::Index n = relays();
    return z(k) * z(k) + z(k + n) * z(k + n);
  }
};

/// [Re -Im; Im Re] so that z'Mz = u'Hu for z = [Re u; Im u].
inline RMatrix real_embedding(const HermitianMatrix &h) {
  const Eigen::Index n = h.size();
  RMatrix m(2 * n, 2 * n);
  const RMatrix re = h.matrix().real(), im = h.matrix().imag();
  m << re, -im, im, re;
  return m;
}

inline RVector stack(const CVector &u) {
  RVector z(2 * u.size());
  z << u.real(), u.imag();
  return z;
}

inline CVector unstack(const RVector &z) {
  const Eigen::Index n = z.size() / 2;
  CVector u(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = Complex(z(i), z(i + n));
  return u;
}

inline PnormEmbedding build_pnorm_embedding(const IndivPowerProblem &p, int pexp) {
  p.validate();
  if (pexp < 1) throw InputError("build_pnorm_embedding: p must be >= 1");
  const double rmin = lambda_min(p.stats.R);
  if (!(rmin > 1e-12 * std::max(p.stats.R.norm(), 1e-300)))
    throw SingularityError("build_pnorm_embedding: R must be positive definite", rmin);
  PnormEmbedding e;
  e.D1 = p.scale_coeffs().cwiseSqrt();
  const CMatrix dinv = e.D1.cwiseInverse().cast<Complex>().asDiagonal();
  e.Q1 = p.stats.Q.congruence(dinv);
  e.R1 = p.stats.R.congruence(dinv);
  e.F = real_embedding(e.Q1);
  e.K = real_embedding(e.R1);
  e.p = pexp;
  return e;
}

/// Smallest p with log N / log(1 + eps) <= p, rounded up to a power of two.
inline int choose_p(Eigen::Index n, double eps) {
  if (!(eps > 0.0)) throw InputError("choose_p: eps must be positive");
  if (n < 1) throw InputError("choose_p: need at least one relay");
  if (n == 1) return 1;
  const double bound = std::log(static_cast<double>(n)) / std::log1p(eps);
  const double need = std::ceil(bound - 1e-9);
  int p = 1;
  while (p < need) {
    if (p > (1 << 29)) throw InputError("choose_p: eps too small");
    p *= 2;
  }
  return p;
}

struct PhiPDerivatives {
  double value = 0.0;
  RVector grad;
  RMatrix hess;
};

/// phi_p(z) = (sum_k (z'Jt_k z)^p)^{1/p} with gradient and Hessian. Ratios
/// s_k / phi_p are at most one, so large p does not overflow.
inline PhiPDerivatives phi_p_grad_hess(const PnormEmbedding &e, const RVector &z) {
  const Eigen::Index n = e.relays();
  if (z.size() != 2 * n) throw InputError("phi_p_grad_hess: z has wrong length");
  RVector s(n);
  for (Eigen::Index k = 0; k < n; ++k) s(k) = e.slot(z, k);
  const double smax = s.maxCoeff();
  if (!(smax > 0.0)) throw SingularityError("phi_p_grad_hess: phi_p is not differentiable at z = 0", 0.0);
  const double p = e.p;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) acc += std::pow(s(k) / smax, p);
  PhiPDerivatives d;
  d.value = smax * std::pow(acc, 1.0 / p);
  d.grad = RVector::Zero(2 * n);
  d.hess = RMatrix::Zero(2 * n, 2 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ratio = s(k) / d.value;
    const double w1 = std::pow(ratio, p - 1.0);
    const std::array<Eigen::Index, 2> idx{k, k + n};
    for (auto i : idx) {
      d.grad(i) += 2.0 * w1 * z(i);
      d.hess(i, i) += 2.0 * w1;
    }
    if (e.p > 1 && ratio > 0.0) {
      const double w2 = 4.0 * (p - 1.0) / d.value * std::pow(ratio, p - 2.0);
      for (auto i : idx)
        for (auto j : idx) d.hess(i, j) += w2 * z(i) * z(j);
    }
  }
  d.hess += (1.0 - p) / d.value * d.grad * d.grad.transpose();
  d.hess = 0.5 * (d.hess + d.hess.transpose()).eval();
  return d;
}

/// Multiplier of the p = 1 problem: lambda_min(K^{-1/2} F K^{-1/2} + K^{-1}).
inline double initial_multiplier(const PnormEmbedding &e) {
  const RealEigenDecomposition ek = symmetric_eig(e.K);
  if (!(ek.min() > 0.0)) throw SingularityError("initial_multiplier: K is not positive definite", ek.min());
  const RMatrix kis = ek.eigenvectors * ek.eigenvalues.cwiseInverse().cwiseSqrt().asDiagonal() * ek.eigenvectors.transpose();
  const RMatrix m = kis * (e.F + RMatrix::Identity(e.F.rows(), e.F.cols())) * kis;
  return symmetric_eig(RMatrix(0.5 * (m + m.transpose()))).min();
}

/// Minimizer of z'(F + I)z on z'Kz = 1, the exact answer for p = 1.
inline RVector p1_minimizer(const PnormEmbedding &e) {
  const RealEigenDecomposition ek = symmetric_eig(e.K);
  const RMatrix kis = ek.eigenvectors * ek.eigenvalues.cwiseInverse().cwiseSqrt().asDiagonal() * ek.eigenvectors.transpose();
  const RMatrix m = kis * (e.F + RMatrix::Identity(e.F.rows(), e.F.cols())) * kis;
  return kis * symmetric_eig(RMatrix(0.5 * (m + m.transpose()))).vector(0);
}

struct AugLagOptions {
  double mu = 1e-3;
  bool decrease_mu = false;  // shrink mu by 10x when the residual stalls
  double constraint_tol = 1e-8;
  double grad_tol = 1e-6;
  int max_outer = 100;
  int max_inner = 500;
};

struct AugLagState {
  RVector z;
  double lambda = 0.0;
  double mu = 1e-3;
  double constraint_residual = 0.0;
};

struct PnormResult : SearchResult {
  AugLagState state;
  double smoothed_objective = 0.0;  // z'Fz + phi_p(z) at the final z
};

/// Augmented Lagrangian on  min z'Fz + phi_p(z)  s.t. z'Kz = 1, starting from
/// u0 = D1 w0 normalized onto the constraint (the p = 1 minimizer when w0 is absent).
inline PnormResult augmented_lagrangian_solve(const IndivPowerProblem &prob, const PnormEmbedding &e,
                                              const std::optional<CVector> &w0 = std::nullopt,
                                              const AugLagOptions &opts = {}) {
  const Eigen::Index n = e.relays();
  if (prob.size() != n) throw InputError("augmented_lagrangian_solve: embedding and problem disagree");
  RVector z;
  if (w0) {
    if (w0->size() != n) throw InputError("augmented_lagrangian_solve: start vector has wrong length");
    z = stack(CVector(e.D1.cast<Complex>().asDiagonal() * *w0));
  } else {
    z = p1_minimizer(e);
  }
  const double kz = z.dot(e.K * z);
  if (!(kz > 0.0)) throw InputError("augmented_lagrangian_solve: start vector is zero");
  z /= std::sqrt(kz);

  SolverTrace trace({"outer_k", "inner_i", "L", "constraint_residual", "grad_norm", "alpha"});
  AugLagState st{z, initial_multiplier(e), opts.mu, 0.0};

  struct Eval {
    double L;
    RVector grad;
    RMatrix hess;
    double c;
  };
  auto evaluate = [&](const RVector &x, bool with_hess) {
    const auto ph = phi_p_grad_hess(e, x);
    const RVector fx = e.F * x, kx = e.K * x;
    const double c = x.dot(kx) - 1.0;
    Eval ev;
    ev.c = c;
    ev.L = x.dot(fx) + ph.value - st.lambda * c + c * c / (2.0 * st.mu);
    ev.grad = 2.0 * fx + ph.grad - 2.0 * st.lambda * kx + (2.0 / st.mu) * c * kx;
    if (with_hess)
      ev.hess = 2.0 * e.F + ph.hess - 2.0 * st.lambda * e.K + (2.0 / st.mu) * c * e.K +
                (4.0 / st.mu) * kx * kx.transpose();
    return ev;
  };

  double prev_residual = std::numeric_limits<double>::infinity();
  for (int outer = 1; outer <= opts.max_outer; ++outer) {
    Eval ev = evaluate(st.z, true);
    int inner = 0;
    for (; inner < opts.max_inner && ev.grad.norm() > opts.grad_tol; ++inner) {
      RMatrix h = 0.5 * (ev.hess + ev.hess.transpose());
      const double hmin = symmetric_eig(h).min();
      if (hmin <= 0.0) h.diagonal().array() += -hmin + 1e-6;
      const RVector dir = -h.ldlt().solve(ev.grad);
      const double slope = dir.dot(ev.grad);
      double alpha = 1.0;
      Eval next = evaluate(st.z + alpha * dir, false);
      while (next.L > ev.L + 1e-4 * alpha * slope) {
        alpha *= 0.5;
        if (alpha < 1e-16) {
          // Round-off floor: no representable decrease left along dir.
          if (ev.grad.norm() <= 1e3 * opts.grad_tol) break;
          std::ostringstream os;
          os << "augmented_lagrangian_solve: line search stalled at outer " << outer << ", inner " << inner
             << " (|grad L| = " << ev.grad.norm() << ")";
          throw SearchConvergenceError(os.str(), std::move(trace));
        }
        next = evaluate(st.z + alpha * dir, false);
      }
      if (alpha < 1e-16) break;
      st.z += alpha * dir;
      ev = evaluate(st.z, true);
      trace.add({static_cast<double>(outer), static_cast<double>(inner), ev.L, ev.c, ev.grad.norm(), alpha});
    }
    st.constraint_residual = ev.c;
    const double gnorm = ev.grad.norm();
    if (std::abs(ev.c) <= opts.constraint_tol && gnorm <= opts.grad_tol) {
      PnormResult out;
      static_cast<SearchResult &>(out) =
          detail::finish_search(prob, CVector(e.D1.cwiseInverse().cast<Complex>().asDiagonal() * unstack(st.z)),
                                std::move(trace), outer);
      out.state = st;
      out.smoothed_objective = st.z.dot(e.F * st.z) + phi_p_grad_hess(e, st.z).value;
      return out;
    }
    st.lambda -= ev.c / st.mu;
    if (opts.decrease_mu && std::abs(ev.c) > 0.25 * prev_residual) st.mu *= 0.1;
    prev_residual = std::abs(ev.c);
  }
  throw SearchConvergenceError("augmented_lagrangian_solve: outer loop did not converge", std::move(trace));
}

} // namespace relaybf
