#pragma once

// Dense complex linear algebra kernel: Hermitian matrices, a cyclic Jacobi
// eigensolver, PSD square roots and tests. Sizes are small (n <= ~32), so
// everything is dense and O(n^3) per sweep.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "relaybf/errors.hpp"

namespace relaybf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr Complex kI{0.0, 1.0};

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const auto v = m(i, j);
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, Complex>) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
      } else {
        if (!std::isfinite(v)) return false;
      }
    }
  return true;
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived> &m, const char *what) {
  if (!all_finite(m)) throw InputError(std::string(what) + ": non-finite entry");
}

/// Largest |M(i,j) - conj(M(j,i))| over all entry pairs.
inline double max_asymmetry(const CMatrix &m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

/// Complex square matrix stored in symmetrized form (H + H^dagger)/2.
class HermitianMatrix {
public:
  HermitianMatrix() = default;

  explicit HermitianMatrix(const CMatrix &m) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw InputError("HermitianMatrix: matrix must be square and non-empty");
    require_finite(m, "HermitianMatrix");
    m_ = 0.5 * (m + m.adjoint());
    for (Eigen::Index i = 0; i < m_.rows(); ++i) m_(i, i) = Complex(m_(i, i).real(), 0.0);
  }

  static HermitianMatrix from_real(const RMatrix &m) { return HermitianMatrix(CMatrix(m.cast<Complex>())); }

  static HermitianMatrix identity(Eigen::Index n) { return HermitianMatrix(CMatrix(CMatrix::Identity(n, n))); }
  static HermitianMatrix zero(Eigen::Index n) { return HermitianMatrix(CMatrix(CMatrix::Zero(n, n))); }
  static HermitianMatrix diagonal(const RVector &d) {
    return HermitianMatrix(CMatrix(d.cast<Complex>().asDiagonal()));
  }
  /// v v^dagger
  static HermitianMatrix outer(const CVector &v) { return HermitianMatrix(CMatrix(v * v.adjoint())); }

  Eigen::Index size() const noexcept { return m_.rows(); }
  const CMatrix &matrix() const noexcept { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// v^dagger H v (real by construction).
  double quad(const CVector &v) const { return (v.adjoint() * m_ * v)(0, 0).real(); }
  /// Re Tr(H X) for another Hermitian X.
  double trace_with(const HermitianMatrix &x) const { return (m_.cwiseProduct(x.m_.transpose())).sum().real(); }
  double trace() const { return m_.trace().real(); }
  double norm() const { return m_.norm(); }
  RVector diag() const { return m_.diagonal().real(); }

  /// Off-diagonal Frobenius mass.
  double off_diagonal_norm() const {
    CMatrix off = m_;
    off.diagonal().setZero();
    return off.norm();
  }
  bool is_diagonal(double rel_tol = 1e-12) const {
    const double scale = std::max(1.0, m_.diagonal().cwiseAbs().sum());
    return off_diagonal_norm() <= rel_tol * scale;
  }

  friend HermitianMatrix operator+(const HermitianMatrix &a, const HermitianMatrix &b) {
    return HermitianMatrix(CMatrix(a.m_ + b.m_));
  }
  friend HermitianMatrix operator-(const HermitianMatrix &a, const HermitianMatrix &b) {
    return HermitianMatrix(CMatrix(a.m_ - b.m_));
  }
  friend HermitianMatrix operator*(double s, const HermitianMatrix &a) { return HermitianMatrix(CMatrix(s * a.m_)); }
  /// M^dagger H M, congruence keeps Hermitian symmetry.
  HermitianMatrix congruence(const CMatrix &m) const { return HermitianMatrix(CMatrix(m.adjoint() * m_ * m)); }

private:
  CMatrix m_;
};

/// Spectrum in ascending order with orthonormal eigenvector columns.
template <typename Scalar>
struct EigenDecompositionT {
  RVector eigenvalues;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> eigenvectors;
  double spectral_gap = std::numeric_limits<double>::infinity();

  Eigen::Index size() const { return eigenvalues.size(); }
  double min() const { return eigenvalues(0); }
  double max() const { return eigenvalues(eigenvalues.size() - 1); }
  auto vector(Eigen::Index i) const { return eigenvectors.col(i); }
};

using EigenDecomposition = EigenDecompositionT<Complex>;
using RealEigenDecomposition = EigenDecompositionT<double>;

namespace detail {

inline double conj_if(double v) { return v; }
inline Complex conj_if(Complex v) { return std::conj(v); }
inline double abs_sq(double v) { return v * v; }
inline double abs_sq(Complex v) { return std::norm(v); }

} // namespace detail

/// Cyclic Jacobi diagonalization of a self-adjoint matrix (real symmetric or
/// complex Hermitian). Only the upper triangle is trusted; input is
/// symmetrized first.
template <typename Scalar>
EigenDecompositionT<Scalar> jacobi_eig(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> &input,
                                       int max_sweeps = 100) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = input.rows();
  if (n == 0 || input.cols() != n) throw InputError("jacobi_eig: matrix must be square and non-empty");
  require_finite(input, "jacobi_eig");

  Mat a = (input + input.adjoint()) * 0.5;
  Mat v = Mat::Identity(n, n);
  const double total = std::max(a.norm(), std::numeric_limits<double>::min());

  auto off_norm2 = [&] {
    double s = 0.0;
    for (Eigen::Index q = 1; q < n; ++q)
      for (Eigen::Index p = 0; p < q; ++p) s += detail::abs_sq(a(p, q));
    return s;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (off_norm2() <= 1e-32 * total * total) break;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        const double mag = std::sqrt(detail::abs_sq(apq));
        if (mag <= 1e-300) continue;
        const Scalar phase = apq / mag;
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // U = I except U_pp = U_qq = c, U_pq = s*phase, U_qp = -s*conj(phase); A <- U^dagger A U.
        const Scalar upq = s * phase;
        const Scalar uqp = -s * detail::conj_if(phase);
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar akp = a(k, p);
          const Scalar akq = a(k, q);
          a(k, p) = akp * c + akq * uqp;
          a(k, q) = akp * upq + akq * c;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar apk = a(p, k);
          const Scalar aqk = a(q, k);
          a(p, k) = c * apk + detail::conj_if(uqp) * aqk;
          a(q, k) = detail::conj_if(upq) * apk + c * aqk;
        }
        a(p, q) = Scalar(0);
        a(q, p) = Scalar(0);
        a(p, p) = Scalar(std::real(a(p, p)));
        a(q, q) = Scalar(std::real(a(q, q)));
        for (Eigen::Index k = 0; k < n; ++k) {
          const Scalar vkp = v(k, p);
          const Scalar vkq = v(k, q);
          v(k, p) = vkp * c + vkq * uqp;
          v(k, q) = vkp * upq + vkq * c;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return std::real(a(i, i)) < std::real(a(j, j)); });

  EigenDecompositionT<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = std::real(a(order[k], order[k]));
    auto col = v.col(order[k]);
    // Gauge: largest-magnitude component real and positive.
    Eigen::Index imax = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(col(i)) > std::abs(col(imax)) + 1e-14) imax = i;
    const Scalar g = col(imax) / std::abs(col(imax));
    out.eigenvectors.col(k) = col * detail::conj_if(g);
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    out.spectral_gap = std::min(out.spectral_gap, out.eigenvalues(k + 1) - out.eigenvalues(k));
  return out;
}

inline EigenDecomposition hermitian_eig(const HermitianMatrix &h) { return jacobi_eig<Complex>(h.matrix()); }

inline RealEigenDecomposition symmetric_eig(const RMatrix &m) { return jacobi_eig<double>(m); }

inline double lambda_min(const HermitianMatrix &h) { return hermitian_eig(h).min(); }
inline double lambda_max(const HermitianMatrix &h) { return hermitian_eig(h).max(); }

/// Rebuilds V f(Lambda) V^dagger from a decomposition.
template <typename F>
HermitianMatrix spectral_map(const EigenDecomposition &e, F &&f) {
  RVector mapped(e.size());
  for (Eigen::Index i = 0; i < e.size(); ++i) mapped(i) = f(e.eigenvalues(i));
  return HermitianMatrix(CMatrix(e.eigenvectors * mapped.cast<Complex>().asDiagonal() * e.eigenvectors.adjoint()));
}

/// H^{-1/2}; throws SingularityError naming the smallest eigenvalue when lambda_min(H) <= eps.
inline HermitianMatrix psd_inv_sqrt(const HermitianMatrix &h, double eps = 1e-12) {
  const auto e = hermitian_eig(h);
  if (!(e.min() > eps)) {
    std::ostringstream os;
    os << "psd_inv_sqrt: matrix not positive definite, lambda_min = " << e.min() << " <= " << eps;
    throw SingularityError(os.str(), e.min());
  }
  return spectral_map(e, [](double l) { return 1.0 / std::sqrt(l); });
}

/// H^{1/2} with negative eigenvalues clipped to zero.
inline HermitianMatrix psd_sqrt(const HermitianMatrix &h) {
  return spectral_map(hermitian_eig(h), [](double l) { return l > 0.0 ? std::sqrt(l) : 0.0; });
}

inline HermitianMatrix inverse(const HermitianMatrix &h, double eps = 1e-12) {
  const auto e = hermitian_eig(h);
  const double smallest = e.eigenvalues.cwiseAbs().minCoeff();
  if (!(smallest > eps)) throw SingularityError("inverse: singular matrix", smallest);
  return spectral_map(e, [](double l) { return 1.0 / l; });
}

inline bool is_psd(const HermitianMatrix &h, double tol = 1e-9) { return lambda_min(h) >= -tol; }

} // namespace relaybf
