#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lalign {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Scale-free positive-definiteness threshold: smallest eigenvalue must exceed
/// kDefaultPdTol * trace / dim.
inline constexpr double kDefaultPdTol = 1e-10;

/// Symmetric (not necessarily definite) matrix, e.g. a tangent vector before
/// flattening or the logarithm of an SPD matrix.
class SymMatrix {
 public:
  SymMatrix() = default;
  /// Symmetrizes `raw` as (raw + raw^T) / 2. Throws NonFinite / DimMismatch.
  explicit SymMatrix(const Matrix& raw);

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

/// Symmetric positive definite matrix: a point on the SPD manifold.
class SpdMatrix {
 public:
  struct Unchecked {};

  SpdMatrix() = default;
  /// Wraps `m` without validation; the caller guarantees symmetry and
  /// positive definiteness (used for the outputs of matrix functions).
  SpdMatrix(Matrix m, Unchecked) : m_(std::move(m)) {}

  static SpdMatrix identity(Eigen::Index dim) { return {Matrix::Identity(dim, dim), Unchecked{}}; }

  const Matrix& matrix() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

/// Symmetrizes and validates. Throws NonFinite, DimMismatch (non-square) or
/// NotPositiveDefinite when the smallest eigenvalue is <= tol * trace / dim.
SpdMatrix spd_from_matrix(const Matrix& raw, double tol = kDefaultPdTol);

/// Ascending eigenvalues and matching eigenvectors of a symmetric matrix.
/// Throws EigFailure if the solver does not converge.
struct SymEigen {
  Vector values;
  Matrix vectors;
};
SymEigen sym_eigen(const Matrix& sym);

/// U f(Lambda) U^T, symmetrized.
template <typename F>
Matrix apply_spectral(const SymEigen& eig, F&& f) {
  Vector mapped = eig.values.unaryExpr(f);
  Matrix out = eig.vectors * mapped.asDiagonal() * eig.vectors.transpose();
  return 0.5 * (out + out.transpose());
}

SpdMatrix spd_sqrt(const SpdMatrix& p);
SpdMatrix spd_inv_sqrt(const SpdMatrix& p);
SpdMatrix spd_inverse(const SpdMatrix& p);
SymMatrix spd_log(const SpdMatrix& p);
SpdMatrix spd_exp(const SymMatrix& s);

/// A * P * A^T, symmetrized. A must be invertible for the result to be SPD.
SpdMatrix congruence(const SpdMatrix& p, const Matrix& a);

/// Affine-invariant geodesic distance sqrt(sum_r log^2 lambda_r) with lambda_r
/// the eigenvalues of P1^{-1/2} P2 P1^{-1/2}.
double riemannian_distance(const SpdMatrix& p1, const SpdMatrix& p2);
/// Same distance with P1^{-1/2} supplied by the caller (for one-to-many use).
/// riemannian_distance(p1, p2) == riemannian_distance_whitened(spd_inv_sqrt(p1).matrix(), p2) bitwise.
double riemannian_distance_whitened(const Matrix& inv_sqrt_p1, const SpdMatrix& p2);

/// Tangent vector at `ref`, flattened as the row-major upper triangle with
/// off-diagonal entries scaled by sqrt(2): (s11, r2*s12, ..., r2*s1C, s22, ..., sCC).
/// Euclidean inner products of flats equal Frobenius inner products.
struct TangentVector {
  SpdMatrix ref_point;
  Vector flat;
};

Vector flatten_upper(const Matrix& sym);
Matrix unflatten_upper(const Vector& flat, Eigen::Index dim);
Eigen::Index tangent_dim(Eigen::Index channels);

/// Log_ref(P) = ref^{1/2} log(ref^{-1/2} P ref^{-1/2}) ref^{1/2}, flattened.
TangentVector tangent_map(const SpdMatrix& ref, const SpdMatrix& p);
/// Exp_ref(S) = ref^{1/2} exp(ref^{-1/2} S ref^{-1/2}) ref^{1/2}.
SpdMatrix tangent_unmap(const TangentVector& v);

/// Precomputed ref^{1/2} and ref^{-1/2} for mapping many matrices at one point.
class TangentSpace {
 public:
  explicit TangentSpace(const SpdMatrix& ref);

  TangentVector map(const SpdMatrix& p) const;
  SpdMatrix unmap(const Vector& flat) const;
  const SpdMatrix& ref() const { return ref_; }

 private:
  SpdMatrix ref_;
  Matrix sqrt_;
  Matrix inv_sqrt_;
};

/// exp(mean_i log P_i). Throws EmptyInput / DimMismatch.
SpdMatrix log_euclidean_mean(std::span<const SpdMatrix> ps);
/// Entrywise average. Throws EmptyInput / DimMismatch.
SpdMatrix arithmetic_mean_cov(std::span<const SpdMatrix> ps);

}  // namespace lalign
