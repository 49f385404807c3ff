#pragma once

// Complex unitary-matrix numerics: Haar sampling, polar projection, geodesics,
// distances and tangent-space projection on U(n).

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include "flatrep/errors.hpp"

namespace flatrep {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

/// Tolerances shared by the unitary checks.
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kDeterminantTol = 1e-9;
inline constexpr double kScreenTol = 1e-8;
inline constexpr double kSingularTol = 1e-12;

namespace detail {

inline double unitarity_defect(const CMatrix& m) {
  if (m.rows() == 0) return 0.0;
  return (m * m.adjoint() - CMatrix::Identity(m.rows(), m.cols())).norm();
}

inline CMatrix skew_part(const CMatrix& m) { return 0.5 * (m - m.adjoint()); }

/// splitmix64 finalizer; derives independent sub-seeds from one user seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// An element of U(n). Construction through the public constructor checks
/// ||U U^H - I||_F <= 1e-10 and ||det U| - 1| <= 1e-9; dim 0 is the empty matrix.
class Unitary {
 public:
  Unitary() = default;

  explicit Unitary(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) {
      throw DimensionMismatch("unitary matrix must be square, got " + std::to_string(m_.rows()) +
                              "x" + std::to_string(m_.cols()));
    }
    const double defect = detail::unitarity_defect(m_);
    if (!(defect <= kUnitaryTol)) {
      throw NotUnitaryError("||U U^H - I||_F = " + format_real(defect) + " exceeds 1e-10");
    }
    if (m_.rows() > 0) {
      const double det_defect = std::abs(std::abs(m_.determinant()) - 1.0);
      if (!(det_defect <= kDeterminantTol)) {
        throw NotUnitaryError("||det U| - 1| = " + format_real(det_defect) + " exceeds 1e-9");
      }
    }
  }

  /// Wraps a matrix the caller already knows to be unitary (products, adjoints,
  /// polar factors). No check is made.
  static Unitary unchecked(CMatrix m) {
    Unitary u;
    u.m_ = std::move(m);
    return u;
  }

  static Unitary identity(Index n) { return unchecked(CMatrix::Identity(n, n)); }

  Index dim() const noexcept { return m_.rows(); }
  const CMatrix& matrix() const noexcept { return m_; }

  Unitary inverse() const { return unchecked(m_.adjoint()); }

  Unitary operator*(const Unitary& other) const {
    if (dim() != other.dim()) throw DimensionMismatch("unitary product of unequal dimensions");
    return unchecked(m_ * other.m_);
  }

  friend bool operator==(const Unitary& a, const Unitary& b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

 private:
  CMatrix m_;
};

/// A tangent vector to U(n) at `base`: base^H * direction is skew-Hermitian.
class SkewTangent {
 public:
  SkewTangent(Unitary base, CMatrix direction) : base_(std::move(base)), dir_(std::move(direction)) {
    if (dir_.rows() != base_.dim() || dir_.cols() != base_.dim()) {
      throw DimensionMismatch("tangent direction shape does not match its base point");
    }
    if (base_.dim() > 0) {
      const CMatrix h = base_.matrix().adjoint() * dir_;
      const double defect = (h + h.adjoint()).norm();
      if (!(defect <= kUnitaryTol * std::max(1.0, dir_.norm()))) {
        throw PreconditionError("base^H * direction is not skew-Hermitian (defect " +
                                format_real(defect) + ")");
      }
    }
  }

  const Unitary& base() const noexcept { return base_; }
  const CMatrix& direction() const noexcept { return dir_; }

 private:
  Unitary base_;
  CMatrix dir_;
};

/// Orthogonal projection of an ambient matrix onto the tangent space at `base`:
/// base * skew(base^H * ambient).
inline SkewTangent tangent_project(const Unitary& base, const CMatrix& ambient) {
  if (ambient.rows() != base.dim() || ambient.cols() != base.dim()) {
    throw DimensionMismatch("ambient matrix shape does not match the base point");
  }
  const CMatrix& u = base.matrix();
  return SkewTangent(base, u * detail::skew_part(u.adjoint() * ambient));
}

/// Haar-distributed element of U(n), deterministic in (n, seed).
inline Unitary haar_random(Index n, std::uint64_t seed) {
  if (n < 0) throw PreconditionError("haar_random: negative dimension");
  if (n == 0) return Unitary{};
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMatrix z(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      z(i, j) = Complex(re, im);
    }
  }
  Eigen::HouseholderQR<CMatrix> qr(z);
  CMatrix q = qr.householderQ();
  const CMatrix& r = qr.matrixQR();
  // Fix the phase ambiguity of QR so the distribution is exactly Haar.
  for (Index j = 0; j < n; ++j) {
    const Complex d = r(j, j);
    const double mag = std::abs(d);
    q.col(j) *= (mag > 0.0) ? d / mag : Complex(1.0, 0.0);
  }
  return Unitary::unchecked(std::move(q));
}

/// Frobenius-nearest unitary to `m` (the unitary polar factor).
inline Unitary project_unitary(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("project_unitary: matrix is not square");
  if (m.rows() == 0) return Unitary{};
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double smallest = svd.singularValues()(m.rows() - 1);
  if (!(smallest > kSingularTol)) throw SingularityError(smallest);
  return Unitary::unchecked(svd.matrixU() * svd.matrixV().adjoint());
}

namespace detail {

/// Spectral data of a unitary: w = Q diag(phases) Q^H with Q unitary.
struct UnitarySpectrum {
  CMatrix q;
  Eigen::VectorXcd eigenvalues;
};

inline UnitarySpectrum unitary_spectrum(const CMatrix& w) {
  // Schur form of a normal matrix is diagonal; it gives an orthonormal eigenbasis
  // even for repeated eigenvalues.
  Eigen::ComplexSchur<CMatrix> schur(w);
  return {schur.matrixU(), schur.matrixT().diagonal()};
}

inline Unitary from_phases(const Unitary& u, const UnitarySpectrum& spec, const Eigen::VectorXd& angles) {
  Eigen::VectorXcd phases(angles.size());
  for (Index i = 0; i < angles.size(); ++i) phases(i) = std::polar(1.0, angles(i));
  return Unitary::unchecked(u.matrix() * spec.q * phases.asDiagonal() * spec.q.adjoint());
}

}  // namespace detail

/// U * exp(t * log(U^H V)) with the principal logarithm.
inline Unitary geodesic(const Unitary& u, const Unitary& v, double t) {
  if (u.dim() != v.dim()) throw DimensionMismatch("geodesic endpoints have unequal dimensions");
  if (u.dim() == 0) return Unitary{};
  const auto spec = detail::unitary_spectrum(u.matrix().adjoint() * v.matrix());
  Eigen::VectorXd angles(spec.eigenvalues.size());
  for (Index i = 0; i < angles.size(); ++i) {
    const Complex lambda = spec.eigenvalues(i);
    const double gap = std::abs(lambda + 1.0);
    if (gap < kScreenTol) throw BranchCutError(gap);
    angles(i) = t * std::arg(lambda);
  }
  return detail::from_phases(u, spec, angles);
}

/// A point halfway between u and v along some (not necessarily principal)
/// one-parameter subgroup. Eigenvalues of U^H V at -1 are split as +pi/2, so
/// this never fails; both halves have rotation angles <= pi/2.
inline Unitary branch_safe_midpoint(const Unitary& u, const Unitary& v) {
  if (u.dim() != v.dim()) throw DimensionMismatch("midpoint endpoints have unequal dimensions");
  if (u.dim() == 0) return Unitary{};
  const auto spec = detail::unitary_spectrum(u.matrix().adjoint() * v.matrix());
  Eigen::VectorXd angles(spec.eigenvalues.size());
  for (Index i = 0; i < angles.size(); ++i) {
    const Complex lambda = spec.eigenvalues(i);
    double a = std::arg(lambda);
    if (std::abs(lambda + 1.0) < kScreenTol) a = std::numbers::pi;
    angles(i) = 0.5 * a;
  }
  return detail::from_phases(u, spec, angles);
}

inline double dist_frob(const Unitary& u, const Unitary& v) {
  if (u.dim() != v.dim()) throw DimensionMismatch("dist_frob: unequal dimensions");
  if (u.dim() == 0) return 0.0;
  return (u.matrix() - v.matrix()).norm();
}

/// Largest absolute entrywise difference; 0 for empty matrices.
inline double max_entry_error(const CMatrix& a, const CMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionMismatch("max_entry_error: shape mismatch");
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

/// Direct sum diag(a, b).
inline Unitary block_diagonal(const Unitary& a, const Unitary& b) {
  const Index n = a.dim() + b.dim();
  CMatrix m = CMatrix::Zero(n, n);
  if (a.dim() > 0) m.topLeftCorner(a.dim(), a.dim()) = a.matrix();
  if (b.dim() > 0) m.bottomRightCorner(b.dim(), b.dim()) = b.matrix();
  return Unitary::unchecked(std::move(m));
}

}  // namespace flatrep
