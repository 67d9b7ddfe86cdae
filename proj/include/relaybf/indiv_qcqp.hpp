#pragma once

// Per-relay budgets with general R, Q through the homogeneous QCQP
//   max w'Rw  s.t.  w'A_k w <= 1,   A_k = c_k J_k + Q,   c_k = (Ps D_kk + sigma^2) / P_k,
// its SDP relaxation, and three ways back to a vector: exact rank reduction
// (n <= 3), Gaussian randomization, or the search solvers in indiv_search.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include "relaybf/channel.hpp"
#include "relaybf/sdp.hpp"

namespace relaybf {

struct QcqpInstance {
  HermitianMatrix R;
  std::vector<HermitianMatrix> A;
  RVector scale_coeffs;

  Eigen::Index size() const { return R.size(); }
  SdpProblem sdp_problem() const { return SdpProblem{R, A}; }
};

inline QcqpInstance build_qcqp(const IndivPowerProblem &p) {
  p.validate();
  QcqpInstance q;
  q.R = p.stats.R;
  q.scale_coeffs = p.scale_coeffs();
  const Eigen::Index n = p.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    CMatrix a = p.stats.Q.matrix();
    a(k, k) += q.scale_coeffs(k);
    q.A.emplace_back(a);
  }
  return q;
}

inline double qcqp_objective(const QcqpInstance &q, const CVector &w) { return q.R.quad(w); }

/// max_k w'A_k w.
inline double qcqp_max_constraint(const QcqpInstance &q, const CVector &w) {
  double m = 0.0;
  for (const auto &a : q.A) m = std::max(m, a.quad(w));
  return m;
}

/// Scales w so max_k w'A_k w = 1.
inline CVector scale_to_qcqp_boundary(const QcqpInstance &q, const CVector &w) {
  const double c = qcqp_max_constraint(q, w);
  if (!(c > 0.0)) throw InputError("scale_to_qcqp_boundary: zero vector");
  return w / std::sqrt(c);
}

/// w / sqrt(eta) with eta = max_k c_k |w_k|^2: the tightest per-relay cap becomes active.
inline BeamformingSolution rescale_to_original(const CVector &w_qcqp, const QcqpInstance &q,
                                               const IndivPowerProblem &p) {
  if (w_qcqp.size() != q.size()) throw InputError("rescale_to_original: dimension mismatch");
  const double eta = (q.scale_coeffs.array() * w_qcqp.cwiseAbs2().array()).maxCoeff();
  if (!(eta > 0.0) || !std::isfinite(eta)) throw InputError("rescale_to_original: zero or non-finite vector");
  BeamformingSolution s;
  s.w = fix_phase(w_qcqp / std::sqrt(eta));
  s.Ps = p.Ps;
  s.snr = snr(p.stats, p.Ps, s.w);
  s.slacks = per_relay_slacks(p.stats, p.Ps, p.P, s.w);
  return s;
}

struct SdpQcqpResult {
  SdpSolution sdp;
  std::optional<CVector> w;  // present only when the relaxation is tight (rank one)
};

inline SdpQcqpResult solve_via_sdp(const IndivPowerProblem &p, const SdpOptions &opts) {
  const QcqpInstance q = build_qcqp(p);
  SdpQcqpResult out;
  out.sdp = solve_relaxation(q.sdp_problem(), opts);
  if (out.sdp.rank_estimate == 1) {
    const auto e = hermitian_eig(out.sdp.X);
    out.w = CVector(std::sqrt(std::max(e.max(), 0.0)) * e.vector(e.size() - 1));
  }
  return out;
}

inline SdpQcqpResult solve_via_sdp(const IndivPowerProblem &p, double tol = 1e-8) {
  SdpOptions o;
  o.tol = tol;
  return solve_via_sdp(p, o);
}

namespace detail {

/// Real coordinates of an r x r Hermitian matrix (diagonal, then Re/Im of the
/// upper triangle scaled by sqrt 2), so Tr(B D) = <coords(B), coords(D)>.
inline RVector herm_coords(const CMatrix &m) {
  const Eigen::Index r = m.rows();
  RVector v(r * r);
  Eigen::Index a = 0;
  for (Eigen::Index i = 0; i < r; ++i) v(a++) = m(i, i).real();
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j) {
      v(a++) = std::sqrt(2.0) * m(i, j).real();
      v(a++) = std::sqrt(2.0) * m(i, j).imag();
    }
  return v;
}

inline CMatrix herm_from_coords(const RVector &v, Eigen::Index r) {
  CMatrix m = CMatrix::Zero(r, r);
  Eigen::Index a = 0;
  for (Eigen::Index i = 0; i < r; ++i) m(i, i) = v(a++);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = i + 1; j < r; ++j) {
      const Complex z(v(a), v(a + 1));
      a += 2;
      m(i, j) = z / std::sqrt(2.0);
      m(j, i) = std::conj(z) / std::sqrt(2.0);
    }
  return m;
}

} // namespace detail

/// Rank reduction for n <= 3. Writing X = V V' with V of rank r >= 2, some
/// nonzero Hermitian Delta has Tr(V'A_kV Delta) = 0 for every k (r^2 > n
/// unknowns). Moving along V(I + t Delta)V' keeps every constraint trace
/// fixed and the objective non-decreasing, and the step to the PSD boundary
/// drops the rank. Repeat until r = 1.
inline CVector rank_one_decompose(const HermitianMatrix &X, const QcqpInstance &q, double rank_tol = 1e-6) {
  const Eigen::Index n = X.size();
  if (n != q.size()) throw InputError("rank_one_decompose: dimension mismatch");
  if (n > 3)
    throw ScopeError("rank_one_decompose: exact rank-one construction is only available for n <= 3; "
                     "use coordinate descent or the p-norm solver");
  const auto e = hermitian_eig(X);
  const double top = e.max();
  if (!(top > 0.0)) throw InputError("rank_one_decompose: X is numerically zero");

  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (e.eigenvalues(i) > rank_tol * top) keep.push_back(i);
  CMatrix v(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    v.col(static_cast<Eigen::Index>(c)) = std::sqrt(e.eigenvalues(keep[c])) * e.vector(keep[c]);

  const auto m = static_cast<Eigen::Index>(q.A.size());
  while (v.cols() > 1) {
    const Eigen::Index r = v.cols();
    RMatrix lin(m, r * r);
    for (Eigen::Index k = 0; k < m; ++k) lin.row(k) = detail::herm_coords(v.adjoint() * q.A[k].matrix() * v).transpose();
    const RVector null = symmetric_eig(RMatrix(lin.transpose() * lin)).vector(0);
    CMatrix delta = detail::herm_from_coords(null, r);
    if (detail::herm_coords(v.adjoint() * q.R.matrix() * v).dot(null) < 0.0) delta = -delta;

    const auto ed = jacobi_eig<Complex>(delta);
    if (!(ed.min() < 0.0)) {
      std::ostringstream os;
      os << "rank_one_decompose: reduction direction is semidefinite (lambda_min = " << ed.min()
         << ", rank " << r << "); constraints do not bound X";
      throw ModelError(os.str());
    }
    const double t = -1.0 / ed.min();
    // I + t Delta = U diag(mu) U'; the column for ed.min() is now zero.
    CMatrix next(n, r - 1);
    Eigen::Index c = 0;
    for (Eigen::Index i = 1; i < r; ++i) {
      const double mu = std::max(1.0 + t * ed.eigenvalues(i), 0.0);
      next.col(c++) = v * ed.vector(i) * std::sqrt(mu);
    }
    v = next;
  }
  return v.col(0);
}

/// Gaussian randomization: draws w ~ CN(0, X), scales each to the QCQP
/// boundary and keeps the best w'Rw. Samples come in fixed blocks with
/// seeds derived from (seed, block), so the result is independent of the
/// thread count and a larger sample count only appends draws.
inline CVector grp_extract(const HermitianMatrix &X, const QcqpInstance &q, std::int64_t samples, std::uint64_t seed,
                           unsigned threads = 0) {
  if (samples < 1) throw InputError("grp_extract: samples must be >= 1");
  if (X.size() != q.size()) throw InputError("grp_extract: dimension mismatch");
  if (!(X.norm() > 0.0) || !(lambda_max(X) > 1e-14 * X.norm())) throw InputError("grp_extract: X is numerically zero");
  const Eigen::Index n = X.size();
  const CMatrix root = psd_sqrt(X).matrix();

  constexpr std::int64_t kBlock = 4096;
  const std::int64_t blocks = (samples + kBlock - 1) / kBlock;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, blocks));

  struct Best {
    double value = -1.0;
    std::int64_t index = -1;
    CVector w;
  };
  std::vector<Best> best(threads);
  auto worker = [&](unsigned id) {
    Best &b = best[id];
    CVector xi(n), w(n);
    for (std::int64_t blk = id; blk < blocks; blk += threads) {
      std::seed_seq ss{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(blk), static_cast<std::uint32_t>(blk >> 32)};
      std::mt19937_64 rng(ss);
      std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
      const std::int64_t end = std::min(samples, (blk + 1) * kBlock);
      for (std::int64_t l = blk * kBlock; l < end; ++l) {
        for (Eigen::Index i = 0; i < n; ++i) xi(i) = Complex(normal(rng), normal(rng));
        w.noalias() = root * xi;
        const double c = qcqp_max_constraint(q, w);
        if (!(c > 0.0)) continue;
        const double v = q.R.quad(w) / c;
        if (v > b.value || (v == b.value && l < b.index)) {
          b.value = v;
          b.index = l;
          b.w = w / std::sqrt(c);
        }
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned id = 1; id < threads; ++id) pool.emplace_back(worker, id);
  worker(0);
  for (auto &t : pool) t.join();

  const Best *winner = nullptr;
  for (const auto &b : best)
    if (b.index >= 0 && (!winner || b.value > winner->value || (b.value == winner->value && b.index < winner->index)))
      winner = &b;
  if (!winner) throw InputError("grp_extract: every sample was zero");
  return winner->w;
}

} // namespace relaybf
