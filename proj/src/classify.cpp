#include "lalign/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "lalign/error.hpp"
#include "lalign/rng.hpp"

namespace lalign {

namespace {

template <typename T>
std::map<Label, std::vector<std::size_t>> group_by_label(std::span<const T> items, std::span<const Label> labels) {
  if (items.size() != labels.size()) {
    throw Error(ErrorCode::DimMismatch,
                std::to_string(items.size()) + " samples but " + std::to_string(labels.size()) + " labels");
  }
  std::map<Label, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);
  return groups;
}

Eigen::Index feature_dim(std::span<const Vector> features) {
  const Eigen::Index d = features.front().size();
  for (const auto& f : features) {
    if (f.size() != d) throw Error(ErrorCode::DimMismatch, "feature vectors differ in length");
    if (!f.allFinite()) throw Error(ErrorCode::NonFinite, "feature vector has NaN/Inf entries");
  }
  return d;
}

}  // namespace

LdaModel lda_fit(std::span<const Vector> features, std::span<const Label> labels, double gamma) {
  const auto groups = group_by_label(features, labels);
  if (groups.size() < 2) throw Error(ErrorCode::MissingClass, "lda_fit needs at least two classes");
  const Eigen::Index d = feature_dim(features);

  LdaModel model;
  Matrix scatter = Matrix::Zero(d, d);
  for (const auto& [label, idx] : groups) {
    Vector mean = Vector::Zero(d);
    for (auto i : idx) mean += features[i];
    mean /= static_cast<double>(idx.size());
    for (auto i : idx) {
      const Vector c = features[i] - mean;
      scatter.noalias() += c * c.transpose();
    }
    model.classes.push_back(label);
    model.means.push_back(std::move(mean));
    model.priors.push_back(static_cast<double>(idx.size()) / static_cast<double>(features.size()));
  }
  const double denom = std::max<double>(1.0, static_cast<double>(features.size() - groups.size()));
  Matrix pooled = scatter / denom;
  const double mu = pooled.trace() / static_cast<double>(d);
  pooled.diagonal().array() += gamma * mu;

  Eigen::LDLT<Matrix> ldlt(pooled);
  if (ldlt.info() != Eigen::Success || !(mu > 0.0) || !ldlt.isPositive()) {
    throw Error(ErrorCode::SingularCovariance, "pooled covariance is singular after regularization");
  }
  model.shared_cov_inv = ldlt.solve(Matrix::Identity(d, d));
  model.shared_cov_inv = 0.5 * (model.shared_cov_inv + model.shared_cov_inv.transpose());
  return model;
}

Label lda_predict(const LdaModel& model, const Vector& x) {
  if (x.size() != model.shared_cov_inv.rows()) throw Error(ErrorCode::DimMismatch, "lda_predict: feature length");
  double best = -std::numeric_limits<double>::infinity();
  Label out = model.classes.front();
  for (std::size_t m = 0; m < model.classes.size(); ++m) {
    const Vector w = model.shared_cov_inv * model.means[m];
    const double score = x.dot(w) - 0.5 * model.means[m].dot(w) + std::log(model.priors[m]);
    if (score > best) {
      best = score;
      out = model.classes[m];
    }
  }
  return out;
}

namespace {

BinarySvm train_binary(std::span<const Vector> features, const std::vector<std::size_t>& pos,
                       const std::vector<std::size_t>& neg, Label pos_label, Label neg_label, const SvmParams& params,
                       std::uint64_t stream) {
  const Eigen::Index d = features.front().size();
  BinarySvm svm{pos_label, neg_label, Vector::Zero(d), 0.0, false};

  std::vector<std::size_t> idx(pos);
  idx.insert(idx.end(), neg.begin(), neg.end());
  std::vector<double> y(pos.size(), 1.0);
  y.insert(y.end(), neg.size(), -1.0);

  bool identical = true;
  for (auto i : idx) identical = identical && features[i] == features[idx.front()];
  if (identical) {
    svm.degenerate = true;
    return svm;
  }

  // augmented weight vector: last entry multiplies the constant feature 1
  Vector w = Vector::Zero(d + 1);
  std::vector<std::size_t> order(idx.size());
  CounterRng rng(stream);
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (auto o : order) {
      ++t;
      const double eta = 1.0 / (params.lambda * static_cast<double>(t));
      const Vector& x = features[idx[o]];
      const double margin = y[o] * (w.head(d).dot(x) + w(d));
      w *= 1.0 - eta * params.lambda;
      if (margin < 1.0) {
        w.head(d) += eta * y[o] * x;
        w(d) += eta * y[o];
      }
    }
  }
  svm.weights = w.head(d);
  svm.bias = w(d);
  return svm;
}

}  // namespace

LinearSvmModel svm_fit(std::span<const Vector> features, std::span<const Label> labels, const SvmParams& params) {
  const auto groups = group_by_label(features, labels);
  if (groups.size() < 2) throw Error(ErrorCode::MissingClass, "svm_fit needs at least two classes");
  if (!(params.lambda > 0.0) || params.epochs < 1) {
    throw Error(ErrorCode::InvalidConfig, "svm_fit needs lambda > 0 and epochs >= 1");
  }
  feature_dim(features);
  LinearSvmModel model;
  model.params = params;
  for (const auto& [label, _] : groups) model.classes.push_back(label);
  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      const auto stream = CounterRng::derive(params.seed, {0x73766dULL, a, b});
      model.machines.push_back(train_binary(features, groups.at(model.classes[a]), groups.at(model.classes[b]),
                                            model.classes[a], model.classes[b], params, stream));
    }
  }
  return model;
}

Label svm_predict(const LinearSvmModel& model, const Vector& x) {
  std::map<Label, int> votes;
  for (const auto& m : model.machines) {
    if (!m.degenerate && x.size() != m.weights.size()) throw Error(ErrorCode::DimMismatch, "svm_predict: feature length");
    const bool positive = m.degenerate || m.weights.dot(x) + m.bias >= 0.0;
    ++votes[positive ? m.positive : m.negative];
  }
  Label best = model.classes.front();
  int best_votes = -1;
  for (Label c : model.classes) {
    const int v = votes.contains(c) ? votes.at(c) : 0;
    if (v > best_votes) {
      best_votes = v;
      best = c;
    }
  }
  return best;
}

MdmModel mdm_fit(std::span<const SpdMatrix> covs, std::span<const Label> labels) {
  const auto groups = group_by_label(covs, labels);
  if (groups.empty()) throw Error(ErrorCode::EmptyInput, "mdm_fit: no training covariances");
  MdmModel model;
  for (const auto& [label, idx] : groups) {
    std::vector<SpdMatrix> members;
    for (auto i : idx) members.push_back(covs[i]);
    model.classes.push_back(label);
    model.means.push_back(log_euclidean_mean(members));
  }
  return model;
}

Label mdm_predict(const MdmModel& model, const SpdMatrix& cov) {
  double best = std::numeric_limits<double>::infinity();
  Label out = model.classes.front();
  for (std::size_t m = 0; m < model.classes.size(); ++m) {
    const double d = riemannian_distance(model.means[m], cov);
    if (d < best) {
      best = d;
      out = model.classes[m];
    }
  }
  return out;
}

}  // namespace lalign
