#pragma once

// Small dense SDP:   maximize Tr(R X)  s.t.  Tr(A_k X) + s_k = 1,  X >= 0, s >= 0
// with dual          minimize sum y_k  s.t.  Z = sum y_k A_k - R >= 0,  y >= 0.
//
// Primal-dual path following with the HKM search direction and Mehrotra
// predictor-corrector steps. Slacks s and duals (y, Z) are carried as
// explicit variables so the duality gap Tr(X Z) + s'y stays accurate down to
// 1e-10 relative; recovering y from 1 - Tr(A_k X) loses that precision.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "relaybf/numerics.hpp"

namespace relaybf {

struct SdpProblem {
  HermitianMatrix objective;                 // R
  std::vector<HermitianMatrix> constraints;  // A_1 .. A_N

  Eigen::Index size() const { return objective.size(); }
};

struct SdpOptions {
  double tol = 1e-8;       // duality gap
  double feas_tol = 1e-8;
  double rank_tol = 1e-6;  // relative to lambda_max(X)
  int max_newton = 200;   // predictor-corrector iterations
};

struct SdpSolution {
  HermitianMatrix X;
  std::vector<double> dual_y;
  double primal_obj = 0.0;  // Tr(R X)
  double dual_obj = 0.0;    // sum y_k
  double gap = 0.0;
  int rank_estimate = 0;
  int newton_steps = 0;
  std::vector<double> gap_history;  // one entry per iteration
  std::vector<std::string> warnings;
};

struct CertificateReport {
  double primal_feas = 0.0;  // max_k (Tr(A_k X) - 1)^+ together with (-lambda_min(X))^+
  double dual_feas = 0.0;    // lambda_min(sum y_k A_k - R)
  double comp_slack = 0.0;   // |Tr(Z X)| + sum y_k (1 - Tr(A_k X))
};

class SdpConvergenceError : public ConvergenceError {
public:
  SdpConvergenceError(const std::string &what, SdpSolution best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const SdpSolution &best() const noexcept { return best_; }

private:
  SdpSolution best_;
};

inline CertificateReport dual_certificate_residuals(const SdpProblem &p, const SdpSolution &s) {
  CertificateReport rep;
  double viol = std::max(0.0, -lambda_min(s.X));
  CMatrix z = -p.objective.matrix();
  double slack_term = 0.0;
  for (std::size_t k = 0; k < p.constraints.size(); ++k) {
    const double tr = p.constraints[k].trace_with(s.X);
    viol = std::max(viol, tr - 1.0);
    const double y = k < s.dual_y.size() ? s.dual_y[k] : 0.0;
    z += y * p.constraints[k].matrix();
    slack_term += y * (1.0 - tr);
  }
  const HermitianMatrix zh(z);
  rep.primal_feas = std::max(0.0, viol);
  rep.dual_feas = lambda_min(zh);
  rep.comp_slack = std::abs(zh.trace_with(s.X)) + std::abs(slack_term);
  return rep;
}

/// Owns the working memory for one solve.
class SdpSolver {
public:
  explicit SdpSolver(SdpOptions opts = {}) : opts_(opts) {}

  SdpSolution solve(const SdpProblem &p) {
    const Eigen::Index n = p.size();
    const auto m = static_cast<Eigen::Index>(p.constraints.size());
    if (n < 1) throw InputError("sdp: empty problem");
    for (const auto &a : p.constraints)
      if (a.size() != n) throw InputError("sdp: constraint dimension mismatch");
    if (m == 0) throw ModelError("sdp: no constraints, problem unbounded");

    SdpSolution sol;
    if (!is_psd(p.objective, 1e-9)) sol.warnings.emplace_back("objective matrix R is not PSD");
    double max_trace = 0.0;
    CMatrix asum = CMatrix::Zero(n, n);
    for (Eigen::Index k = 0; k < m; ++k) {
      if (!is_psd(p.constraints[k], 1e-9)) sol.warnings.emplace_back("constraint " + std::to_string(k) + " not PSD");
      max_trace = std::max(max_trace, p.constraints[k].trace());
      asum += p.constraints[k].matrix();
    }
    if (!(max_trace > 0.0)) throw ModelError("sdp: all constraint traces non-positive, no bounded feasible set");
    const double asum_min = lambda_min(HermitianMatrix(asum));
    if (!(asum_min > 1e-12))
      throw ModelError("sdp: constraints do not bound every direction (sum A_k singular); relaxation may be unbounded");

    // Iterate on R / rho so the path does not depend on the scale of R.
    const double rho = std::max(p.objective.norm(), 1e-300);
    const CMatrix r = p.objective.matrix() / rho;
    std::vector<CMatrix> a(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) a[k] = p.constraints[k].matrix();
    const CMatrix eye = CMatrix::Identity(n, n);
    const double nu = static_cast<double>(n + m);

    // Strictly feasible start on both sides.
    CMatrix x = eye * (0.5 / max_trace);
    RVector s(m);
    for (Eigen::Index k = 0; k < m; ++k) s(k) = 1.0 - tr(a[k] * x);
    const double ystart = (std::max(lambda_max(HermitianMatrix(r)), 0.0) + 1.0) / asum_min;
    RVector y = RVector::Constant(m, ystart);
    CMatrix z = -r;
    for (Eigen::Index k = 0; k < m; ++k) z += y(k) * a[k];

    auto finish = [&](int steps) {
      sol.X = HermitianMatrix(x);
      sol.dual_y.resize(static_cast<std::size_t>(m));
      for (Eigen::Index k = 0; k < m; ++k) sol.dual_y[k] = rho * y(k);
      sol.primal_obj = p.objective.trace_with(sol.X);
      sol.dual_obj = rho * y.sum();
      sol.gap = std::abs(sol.dual_obj - sol.primal_obj);
      sol.newton_steps = steps;
      const auto ex = hermitian_eig(sol.X);
      const double top = std::max(ex.max(), 0.0);
      sol.rank_estimate = 0;
      for (Eigen::Index i = 0; i < ex.size(); ++i)
        if (ex.eigenvalues(i) > opts_.rank_tol * top) ++sol.rank_estimate;
    };

    for (int step = 0;; ++step) {
      RVector rp(m);
      for (Eigen::Index k = 0; k < m; ++k) rp(k) = 1.0 - tr(a[k] * x) - s(k);
      CMatrix rd = -r - z;
      for (Eigen::Index k = 0; k < m; ++k) rd += y(k) * a[k];
      const double comp = tr(x * z) + s.dot(y);
      const double mu = comp / nu;
      const double gap = rho * std::abs(y.sum() - tr(r * x));
      sol.gap_history.push_back(gap);
      const double dual_res = rho * rd.norm();
      if (rho * comp <= opts_.tol && gap <= opts_.tol && rp.cwiseAbs().maxCoeff() <= opts_.feas_tol &&
          dual_res <= opts_.feas_tol) {
        finish(step);
        break;
      }
      if (step >= opts_.max_newton) {
        finish(step);
        std::ostringstream os;
        os << "sdp: iteration budget " << opts_.max_newton << " exhausted at gap " << gap;
        throw SdpConvergenceError(os.str(), sol);
      }

      const CMatrix zinv = inverse_pd(z);
      RMatrix schur(m, m);
      std::vector<CMatrix> xaz(static_cast<std::size_t>(m));
      for (Eigen::Index j = 0; j < m; ++j) xaz[j] = x * a[j] * zinv;
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) schur(i, j) = tr(a[i] * xaz[j]);
      schur = 0.5 * (schur + schur.transpose());
      for (Eigen::Index k = 0; k < m; ++k) schur(k, k) += s(k) / y(k);
      const auto schur_ldlt = schur.ldlt();
      const CMatrix x_rd_zinv = x * rd * zinv;

      struct Dir {
        CMatrix dx, dz;
        RVector ds, dy;
      };
      // sigma_mu: centering target; corr: optional second-order term (dX_a dZ_a, ds_a dy_a).
      auto direction = [&](double sigma_mu, const Dir *corr) {
        CMatrix extra = CMatrix::Zero(n, n);
        if (corr) extra = corr->dx * corr->dz * zinv;
        RVector h(m);
        for (Eigen::Index k = 0; k < m; ++k) {
          h(k) = tr(a[k] * (sigma_mu * zinv - x)) - tr(a[k] * x_rd_zinv) + sigma_mu / y(k) - s(k) - rp(k);
          if (corr) h(k) -= tr(a[k] * extra) + corr->ds(k) * corr->dy(k) / y(k);
        }
        Dir d;
        d.dy = schur_ldlt.solve(h);
        d.dz = rd;
        for (Eigen::Index k = 0; k < m; ++k) d.dz += d.dy(k) * a[k];
        CMatrix t = x * d.dz * zinv + extra;
        d.dx = sigma_mu * zinv - x - 0.5 * (t + t.adjoint());
        d.ds.resize(m);
        for (Eigen::Index k = 0; k < m; ++k) {
          double num = sigma_mu - s(k) * y(k) - s(k) * d.dy(k);
          if (corr) num -= corr->ds(k) * corr->dy(k);
          d.ds(k) = num / y(k);
        }
        return d;
      };
      auto steps_for = [&](const Dir &d) {
        const double ap = std::min({1.0, max_step(x, d.dx), max_step(s, d.ds)});
        const double ad = std::min({1.0, max_step(z, d.dz), max_step(y, d.dy)});
        return std::pair{ap, ad};
      };

      const Dir pred = direction(0.0, nullptr);
      const auto [ap0, ad0] = steps_for(pred);
      const double comp_aff = tr((x + ap0 * pred.dx) * (z + ad0 * pred.dz)) + (s + ap0 * pred.ds).dot(y + ad0 * pred.dy);
      const double sigma = std::clamp(std::pow(std::max(comp_aff, 0.0) / comp, 3.0), 0.0, 1.0);
      const Dir d = direction(sigma * mu, &pred);
      auto [ap, ad] = steps_for(d);
      ap = std::min(1.0, 0.98 * ap);
      ad = std::min(1.0, 0.98 * ad);
      x += ap * d.dx;
      x = 0.5 * (x + x.adjoint()).eval();
      s += ap * d.ds;
      y += ad * d.dy;
      z += ad * d.dz;
      z = 0.5 * (z + z.adjoint()).eval();
    }
    return sol;
  }

private:
  static double tr(const CMatrix &m) { return m.trace().real(); }

  static CMatrix inverse_pd(const CMatrix &m) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success) throw ConvergenceError("sdp: iterate lost positive definiteness");
    return llt.solve(CMatrix::Identity(m.rows(), m.cols()));
  }

  /// Largest alpha (capped at 1e300) with m + alpha d >= 0, for m > 0.
  static double max_step(const CMatrix &m, const CMatrix &d) {
    Eigen::LLT<CMatrix> llt(m);
    if (llt.info() != Eigen::Success) return 0.0;
    const CMatrix linv = llt.matrixL().solve(CMatrix::Identity(m.rows(), m.cols()));
    const double lmin = jacobi_eig<Complex>(CMatrix(linv * d * linv.adjoint())).min();
    return lmin >= 0.0 ? 1e300 : -1.0 / lmin;
  }
  static double max_step(const RVector &v, const RVector &d) {
    double a = 1e300;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (d(i) < 0.0) a = std::min(a, -v(i) / d(i));
    return a;
  }

  SdpOptions opts_;
};

inline SdpSolution solve_relaxation(const SdpProblem &p, double tol = 1e-8) {
  SdpOptions o;
  o.tol = tol;
  return SdpSolver(o).solve(p);
}

inline SdpSolution solve_relaxation(const SdpProblem &p, const SdpOptions &o) { return SdpSolver(o).solve(p); }

} // namespace relaybf
