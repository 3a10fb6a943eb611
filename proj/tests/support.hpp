#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "lalign/rng.hpp"
#include "lalign/signal.hpp"
#include "lalign/spd.hpp"

namespace lalign::testing {

inline Matrix normal_matrix(CounterRng& rng, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

/// G G^T / C + 0.1 I: SPD with condition number of order tens.
inline SpdMatrix random_spd(CounterRng& rng, Eigen::Index c) {
  const Matrix g = normal_matrix(rng, c, c);
  Matrix p = g * g.transpose() / static_cast<double>(c) + 0.1 * Matrix::Identity(c, c);
  p = 0.5 * (p + p.transpose());
  return SpdMatrix(p, SpdMatrix::Unchecked{});
}

inline SymMatrix random_sym(CounterRng& rng, Eigen::Index c, double spectral_radius) {
  const Matrix g = normal_matrix(rng, c, c);
  Matrix s = 0.5 * (g + g.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  s *= spectral_radius / es.eigenvalues().cwiseAbs().maxCoeff();
  return SymMatrix(s);
}

/// Standard Gaussian matrix, almost surely invertible.
inline Matrix random_invertible(CounterRng& rng, Eigen::Index c) { return normal_matrix(rng, c, c); }

inline Trial random_trial(CounterRng& rng, Eigen::Index c, Eigen::Index t, std::optional<Label> label = {}) {
  return {normal_matrix(rng, c, t), label};
}

inline double rel_fro(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

/// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() / ("lalign_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace lalign::testing
