#pragma once

#include <map>
#include <span>
#include <vector>

#include "lalign/signal.hpp"
#include "lalign/spd.hpp"

namespace lalign {

enum class FeatureKind { CspLogVar, TangentSpace };

struct FeatureVector {
  Vector values;
  FeatureKind kind = FeatureKind::TangentSpace;
};

/// C = X X^T (no 1/T scaling), optionally shrunk towards trace(C)/C * I.
/// Throws NotPositiveDefinite for rank-deficient trials at zero shrinkage.
SpdMatrix trial_covariance(const Trial& x, double shrinkage = 0.0);

/// Covariances of many trials; trials are processed in parallel and the
/// result is bitwise identical to trial_covariances_serial.
std::vector<SpdMatrix> trial_covariances(std::span<const Trial> trials, double shrinkage = 0.0);
std::vector<SpdMatrix> trial_covariances_serial(std::span<const Trial> trials, double shrinkage = 0.0);

enum class CspMode { Binary, OneVsRest };

struct CspModel {
  Matrix filters;  // F x C, rows are spatial filters
  Vector eigenvalues;  // generalized eigenvalue of each row
  int pairs = 0;
  std::vector<Label> classes;
  CspMode mode = CspMode::Binary;
};

inline constexpr int kDefaultCspPairs = 3;

/// Binary CSP for two classes, one-vs-rest for more. Class covariances are the
/// arithmetic means of the given trial covariances. For each binary problem
/// the rows are the `pairs` largest-eigenvalue filters (descending) followed by
/// the `pairs` smallest (ascending); each row satisfies w^T (C1 + C2) w = 1 and
/// has its largest-magnitude entry positive.
CspModel csp_fit(const std::map<Label, std::vector<SpdMatrix>>& covs_by_class, int pairs = kDefaultCspPairs);

/// log(var(y_f) / sum_g var(y_g)) for y = W x, sample variance per row.
FeatureVector csp_features(const CspModel& model, const Trial& x);

/// Tangent-space features of each covariance at `ref`.
std::vector<FeatureVector> ts_features(const SpdMatrix& ref, std::span<const SpdMatrix> covs);

}  // namespace lalign
