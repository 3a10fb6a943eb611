#include "lalign/spd.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lalign/error.hpp"

namespace lalign {

namespace {

void require_square_finite(const Matrix& raw, const char* what) {
  if (raw.rows() != raw.cols() || raw.rows() == 0) {
    throw Error(ErrorCode::DimMismatch, std::string(what) + ": expected a non-empty square matrix, got " +
                                            std::to_string(raw.rows()) + "x" + std::to_string(raw.cols()));
  }
  if (!raw.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + ": matrix has NaN/Inf entries");
}

void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::DimMismatch,
                std::string(what) + ": dimensions " + std::to_string(a) + " and " + std::to_string(b) + " differ");
  }
}

}  // namespace

SymMatrix::SymMatrix(const Matrix& raw) {
  require_square_finite(raw, "SymMatrix");
  m_ = 0.5 * (raw + raw.transpose());
}

SymEigen sym_eigen(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::EigFailure, "symmetric eigensolver did not converge (dim " + std::to_string(sym.rows()) + ")");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

SpdMatrix spd_from_matrix(const Matrix& raw, double tol) {
  require_square_finite(raw, "spd_from_matrix");
  Matrix sym = 0.5 * (raw + raw.transpose());
  const auto eig = sym_eigen(sym);
  const double threshold = tol * sym.trace() / static_cast<double>(sym.rows());
  const double smallest = eig.values(0);
  if (!(smallest > threshold) || !(smallest > 0.0)) {
    throw Error(ErrorCode::NotPositiveDefinite,
                "smallest eigenvalue " + std::to_string(smallest) + " <= threshold " + std::to_string(threshold));
  }
  return {std::move(sym), SpdMatrix::Unchecked{}};
}

SpdMatrix spd_sqrt(const SpdMatrix& p) {
  return {apply_spectral(sym_eigen(p.matrix()), [](double x) { return std::sqrt(x); }), SpdMatrix::Unchecked{}};
}

SpdMatrix spd_inv_sqrt(const SpdMatrix& p) {
  return {apply_spectral(sym_eigen(p.matrix()), [](double x) { return 1.0 / std::sqrt(x); }), SpdMatrix::Unchecked{}};
}

SpdMatrix spd_inverse(const SpdMatrix& p) {
  return {apply_spectral(sym_eigen(p.matrix()), [](double x) { return 1.0 / x; }), SpdMatrix::Unchecked{}};
}

SymMatrix spd_log(const SpdMatrix& p) {
  return SymMatrix(apply_spectral(sym_eigen(p.matrix()), [](double x) { return std::log(x); }));
}

SpdMatrix spd_exp(const SymMatrix& s) {
  return {apply_spectral(sym_eigen(s.matrix()), [](double x) { return std::exp(x); }), SpdMatrix::Unchecked{}};
}

SpdMatrix congruence(const SpdMatrix& p, const Matrix& a) {
  require_same_dim(a.cols(), p.dim(), "congruence");
  Matrix out = a * p.matrix() * a.transpose();
  return {0.5 * (out + out.transpose()), SpdMatrix::Unchecked{}};
}

double riemannian_distance(const SpdMatrix& p1, const SpdMatrix& p2) {
  require_same_dim(p1.dim(), p2.dim(), "riemannian_distance");
  return riemannian_distance_whitened(spd_inv_sqrt(p1).matrix(), p2);
}

double riemannian_distance_whitened(const Matrix& w, const SpdMatrix& p2) {
  require_same_dim(w.rows(), p2.dim(), "riemannian_distance");
  Matrix whitened = w * p2.matrix() * w;
  whitened = 0.5 * (whitened + whitened.transpose());
  const auto eig = sym_eigen(whitened);
  double acc = 0.0;
  for (Eigen::Index r = 0; r < eig.values.size(); ++r) {
    const double l = std::log(eig.values(r));
    acc += l * l;
  }
  return std::sqrt(acc);
}

Eigen::Index tangent_dim(Eigen::Index channels) { return channels * (channels + 1) / 2; }

Vector flatten_upper(const Matrix& sym) {
  const Eigen::Index c = sym.rows();
  Vector flat(tangent_dim(c));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < c; ++i) {
    flat(k++) = sym(i, i);
    for (Eigen::Index j = i + 1; j < c; ++j) flat(k++) = std::numbers::sqrt2 * sym(i, j);
  }
  return flat;
}

Matrix unflatten_upper(const Vector& flat, Eigen::Index dim) {
  require_same_dim(flat.size(), tangent_dim(dim), "unflatten_upper");
  Matrix sym(dim, dim);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    sym(i, i) = flat(k++);
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      const double v = flat(k++) / std::numbers::sqrt2;
      sym(i, j) = v;
      sym(j, i) = v;
    }
  }
  return sym;
}

TangentSpace::TangentSpace(const SpdMatrix& ref) : ref_(ref) {
  const auto eig = sym_eigen(ref.matrix());
  sqrt_ = apply_spectral(eig, [](double x) { return std::sqrt(x); });
  inv_sqrt_ = apply_spectral(eig, [](double x) { return 1.0 / std::sqrt(x); });
}

TangentVector TangentSpace::map(const SpdMatrix& p) const {
  require_same_dim(ref_.dim(), p.dim(), "tangent_map");
  Matrix whitened = inv_sqrt_ * p.matrix() * inv_sqrt_;
  whitened = 0.5 * (whitened + whitened.transpose());
  const Matrix log_w = apply_spectral(sym_eigen(whitened), [](double x) { return std::log(x); });
  Matrix s = sqrt_ * log_w * sqrt_;
  s = 0.5 * (s + s.transpose());
  return {ref_, flatten_upper(s)};
}

SpdMatrix TangentSpace::unmap(const Vector& flat) const {
  const Matrix s = unflatten_upper(flat, ref_.dim());
  Matrix inner = inv_sqrt_ * s * inv_sqrt_;
  inner = 0.5 * (inner + inner.transpose());
  const Matrix e = apply_spectral(sym_eigen(inner), [](double x) { return std::exp(x); });
  Matrix out = sqrt_ * e * sqrt_;
  return {0.5 * (out + out.transpose()), SpdMatrix::Unchecked{}};
}

TangentVector tangent_map(const SpdMatrix& ref, const SpdMatrix& p) { return TangentSpace(ref).map(p); }

SpdMatrix tangent_unmap(const TangentVector& v) { return TangentSpace(v.ref_point).unmap(v.flat); }

namespace {

void require_homogeneous(std::span<const SpdMatrix> ps, const char* what) {
  if (ps.empty()) throw Error(ErrorCode::EmptyInput, std::string(what) + ": empty list");
  for (const auto& p : ps) require_same_dim(ps.front().dim(), p.dim(), what);
}

}  // namespace

SpdMatrix log_euclidean_mean(std::span<const SpdMatrix> ps) {
  require_homogeneous(ps, "log_euclidean_mean");
  const Eigen::Index c = ps.front().dim();
  Matrix acc = Matrix::Zero(c, c);
  for (const auto& p : ps) acc += spd_log(p).matrix();
  acc /= static_cast<double>(ps.size());
  return spd_exp(SymMatrix(acc));
}

SpdMatrix arithmetic_mean_cov(std::span<const SpdMatrix> ps) {
  require_homogeneous(ps, "arithmetic_mean_cov");
  const Eigen::Index c = ps.front().dim();
  Matrix acc = Matrix::Zero(c, c);
  for (const auto& p : ps) acc += p.matrix();
  acc /= static_cast<double>(ps.size());
  return {0.5 * (acc + acc.transpose()), SpdMatrix::Unchecked{}};
}

}  // namespace lalign
