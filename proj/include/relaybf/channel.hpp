#pragma once

// Second-order channel statistics for a two-hop amplify-and-forward relay
// network, plus the SNR and relay power formulas every solver is judged by.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "relaybf/numerics.hpp"

namespace relaybf {

/// Per-relay Rician parameters: f_i = f_mean_i + sqrt(f_var_i) * f~_i, likewise for g.
struct RicianParams {
  CVector f_mean;
  RVector f_var;
  CVector g_mean;
  RVector g_var;

  Eigen::Index size() const { return f_mean.size(); }

  void validate() const {
    const auto n = f_mean.size();
    if (n < 1) throw InputError("RicianParams: need at least one relay");
    if (f_var.size() != n || g_mean.size() != n || g_var.size() != n)
      throw InputError("RicianParams: f_mean, f_var, g_mean, g_var must have equal length");
    require_finite(f_mean, "RicianParams.f_mean");
    require_finite(g_mean, "RicianParams.g_mean");
    require_finite(f_var, "RicianParams.f_var");
    require_finite(g_var, "RicianParams.g_var");
    if ((f_var.array() < 0.0).any()) throw InputError("RicianParams.f_var: negative variance");
    if ((g_var.array() < 0.0).any()) throw InputError("RicianParams.g_var: negative variance");
    if ((f_mean.cwiseAbs2() + f_var).maxCoeff() <= 0.0)
      throw InputError("RicianParams: every source-relay channel is identically zero");
  }
};

/// D = diag(E|f_i|^2), R = E[h h^dagger], Q = E[g g^dagger], common noise variance.
struct ChannelStats {
  RVector D;
  HermitianMatrix R;
  HermitianMatrix Q;
  double sigma2 = 1.0;

  Eigen::Index size() const { return D.size(); }
  bool is_diagonal(double rel_tol = 1e-12) const { return R.is_diagonal(rel_tol) && Q.is_diagonal(rel_tol); }

  void validate() const {
    const auto n = D.size();
    if (n < 1 || R.size() != n || Q.size() != n) throw InputError("ChannelStats: D, R, Q dimensions disagree");
    require_finite(D, "ChannelStats.D");
    if ((D.array() < 0.0).any()) throw InputError("ChannelStats.D: negative entry");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InputError("ChannelStats.sigma2 must be positive");
  }
};

/// Per-relay budgets (Ps D_kk + sigma^2)|w_k|^2 <= P_k at fixed source power Ps.
struct IndivPowerProblem {
  ChannelStats stats;
  double Ps = 0.0;
  RVector P;

  Eigen::Index size() const { return stats.size(); }

  void validate() const {
    stats.validate();
    if (!(Ps > 0.0) || !std::isfinite(Ps)) throw InputError("IndivPowerProblem: Ps must be positive");
    if (P.size() != stats.size()) throw InputError("IndivPowerProblem: need one cap per relay");
    require_finite(P, "IndivPowerProblem.P");
    if ((P.array() <= 0.0).any()) throw InputError("IndivPowerProblem: caps must be positive");
  }

  /// (Ps D_kk + sigma^2) / P_k; constraint k reads coeff_k |w_k|^2 <= 1.
  RVector scale_coeffs() const { return ((Ps * stats.D.array() + stats.sigma2) / P.array()).matrix(); }
};

/// Weights, source power, achieved SNR, and one slack per power constraint.
struct BeamformingSolution {
  CVector w;
  double Ps = 0.0;
  double snr = 0.0;
  RVector slacks;
};

inline ChannelStats build_stats(const RicianParams &p, double sigma2 = 1.0) {
  p.validate();
  if (!(sigma2 > 0.0)) throw InputError("build_stats: sigma2 must be positive");
  const auto n = p.size();
  const RVector sf = p.f_var.cwiseSqrt();
  const RVector sg = p.g_var.cwiseSqrt();
  CMatrix fcov = p.f_mean * p.f_mean.adjoint();
  CMatrix gcov = p.g_mean * p.g_mean.adjoint();
  for (Eigen::Index i = 0; i < n; ++i) {
    fcov(i, i) += sf(i) * sf(i);
    gcov(i, i) += sg(i) * sg(i);
  }
  ChannelStats s;
  s.D = p.f_mean.cwiseAbs2() + p.f_var;
  s.Q = HermitianMatrix(gcov);
  s.R = HermitianMatrix(CMatrix(fcov.cwiseProduct(gcov)));
  s.sigma2 = sigma2;
  return s;
}

/// Destination SNR (Ps / sigma^2) * w'Rw / (1 + w'Qw).
inline double snr(const ChannelStats &s, double Ps, const CVector &w) {
  if (!(Ps > 0.0)) throw InputError("snr: source power must be positive");
  return (Ps / s.sigma2) * s.R.quad(w) / (1.0 + s.Q.quad(w));
}

struct RelayPowers {
  double total = 0.0;
  RVector per_relay;
};

/// P_r = Ps w'Dw + sigma^2 w'w and P_ri = (Ps D_ii + sigma^2)|w_i|^2.
inline RelayPowers powers(const ChannelStats &s, double Ps, const CVector &w) {
  if (!(Ps > 0.0)) throw InputError("powers: source power must be positive");
  RelayPowers out;
  out.per_relay = ((Ps * s.D.array() + s.sigma2) * w.cwiseAbs2().array()).matrix();
  out.total = Ps * (w.cwiseAbs2().cwiseProduct(s.D)).sum() + s.sigma2 * w.squaredNorm();
  return out;
}

/// Rotates w so its largest-magnitude entry is real and positive.
inline CVector fix_phase(const CVector &w) {
  if (w.size() == 0) return w;
  Eigen::Index imax = 0;
  for (Eigen::Index i = 1; i < w.size(); ++i)
    if (std::abs(w(i)) > std::abs(w(imax)) * (1.0 + 1e-12)) imax = i;
  const double m = std::abs(w(imax));
  if (m == 0.0) return w;
  return w * (std::conj(w(imax)) / m);
}

/// Per-relay slacks P_k - P_rk.
inline RVector per_relay_slacks(const ChannelStats &s, double Ps, const RVector &caps, const CVector &w) {
  return caps - powers(s, Ps, w).per_relay;
}

struct EmpiricalStats {
  RVector D;
  HermitianMatrix R;
  HermitianMatrix Q;
};

/// Sample second moments of f, h = (f_i g_i), g over `samples` draws with
/// circularly-symmetric unit-variance Gaussian fading. Deterministic in `seed`.
inline EmpiricalStats monte_carlo_stats(const RicianParams &p, std::int64_t samples, std::uint64_t seed) {
  p.validate();
  if (samples < 1) throw InputError("monte_carlo_stats: samples must be >= 1");
  const auto n = p.size();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
  const RVector sf = p.f_var.cwiseSqrt();
  const RVector sg = p.g_var.cwiseSqrt();

  RVector d = RVector::Zero(n);
  CMatrix r = CMatrix::Zero(n, n);
  CMatrix q = CMatrix::Zero(n, n);
  CVector f(n), g(n), h(n);
  for (std::int64_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      // Draw order fixed per relay so ψ = 0 channels stay exactly deterministic.
      const Complex ft(normal(rng), normal(rng));
      const Complex gt(normal(rng), normal(rng));
      f(i) = p.f_mean(i) + sf(i) * ft;
      g(i) = p.g_mean(i) + sg(i) * gt;
    }
    h = f.cwiseProduct(g);
    d += f.cwiseAbs2();
    r.noalias() += h * h.adjoint();
    q.noalias() += g * g.adjoint();
  }
  const double inv = 1.0 / static_cast<double>(samples);
  return EmpiricalStats{d * inv, HermitianMatrix(CMatrix(r * inv)), HermitianMatrix(CMatrix(q * inv))};
}

} // namespace relaybf
