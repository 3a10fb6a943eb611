#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lalign/signal.hpp"
#include "lalign/spd.hpp"

namespace lalign {

inline constexpr double kLdaShrinkage = 1e-3;

/// Shared-covariance linear discriminant.
struct LdaModel {
  std::vector<Label> classes;  // ascending
  std::vector<Vector> means;
  Matrix shared_cov_inv;
  std::vector<double> priors;
};

/// Pooled within-class covariance is regularized as S + gamma * trace(S)/d * I.
/// Throws MissingClass (< 2 classes), DimMismatch, SingularCovariance.
LdaModel lda_fit(std::span<const Vector> features, std::span<const Label> labels, double gamma = kLdaShrinkage);
/// argmax_m x^T S^-1 mu_m - mu_m^T S^-1 mu_m / 2 + log prior_m; ties go to the earlier class.
Label lda_predict(const LdaModel& model, const Vector& x);

struct SvmParams {
  double lambda = 1e-3;
  int epochs = 200;
  std::uint64_t seed = 0;
};

struct BinarySvm {
  Label positive = 0;  // first class of the pair
  Label negative = 0;
  Vector weights;
  double bias = 0.0;
  bool degenerate = false;  // every training sample identical: always predicts `positive`
};

struct LinearSvmModel {
  std::vector<Label> classes;
  std::vector<BinarySvm> machines;  // one per unordered pair, (i, j) with i < j in class order
  SvmParams params;
};

/// One-vs-one linear SVMs, each trained by seeded stochastic subgradient
/// descent on lambda/2 |w|^2 + mean hinge loss with step 1/(lambda t). The
/// bias is an extra regularized weight on a constant feature.
LinearSvmModel svm_fit(std::span<const Vector> features, std::span<const Label> labels, const SvmParams& params = {});
/// Majority vote; ties go to the earlier class.
Label svm_predict(const LinearSvmModel& model, const Vector& x);

struct MdmModel {
  std::vector<Label> classes;
  std::vector<SpdMatrix> means;  // Log-Euclidean
};

MdmModel mdm_fit(std::span<const SpdMatrix> covs, std::span<const Label> labels);
/// Nearest class mean under the Riemannian distance; ties go to the earlier class.
Label mdm_predict(const MdmModel& model, const SpdMatrix& cov);

}  // namespace lalign
