#include "lalign/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lalign/error.hpp"

namespace lalign {

SpdMatrix trial_covariance(const Trial& x, double shrinkage) {
  if (x.samples() < 1 || x.channels() < 1) throw Error(ErrorCode::EmptyInput, "trial_covariance: empty trial");
  if (!(shrinkage >= 0.0 && shrinkage < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "shrinkage must lie in [0, 1), got " + std::to_string(shrinkage));
  }
  Matrix c = Matrix::Zero(x.channels(), x.channels());
  c.selfadjointView<Eigen::Lower>().rankUpdate(x.data);
  c = c.selfadjointView<Eigen::Lower>();
  if (shrinkage > 0.0) {
    const double mu = c.trace() / static_cast<double>(c.rows());
    c = (1.0 - shrinkage) * c;
    c.diagonal().array() += shrinkage * mu;
  }
  return spd_from_matrix(c);
}

std::vector<SpdMatrix> trial_covariances_serial(std::span<const Trial> trials, double shrinkage) {
  std::vector<SpdMatrix> out;
  out.reserve(trials.size());
  for (const auto& t : trials) out.push_back(trial_covariance(t, shrinkage));
  return out;
}

std::vector<SpdMatrix> trial_covariances(std::span<const Trial> trials, double shrinkage) {
  std::vector<SpdMatrix> out(trials.size());
  const long n = static_cast<long>(trials.size());
  std::vector<std::exception_ptr> errors(trials.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = trial_covariance(trials[i], shrinkage);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

namespace {

struct BinaryCsp {
  Matrix filters;
  Vector eigenvalues;
};

void fix_sign(Matrix& filters, Eigen::Index row) {
  Eigen::Index arg = 0;
  filters.row(row).cwiseAbs().maxCoeff(&arg);
  if (filters(row, arg) < 0.0) filters.row(row) *= -1.0;
}

BinaryCsp binary_csp(const SpdMatrix& c1, const SpdMatrix& c2, int pairs) {
  const Matrix composite = c1.matrix() + c2.matrix();
  SpdMatrix composite_spd;
  try {
    composite_spd = spd_from_matrix(composite);
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateCovariance, "composite class covariance is not SPD (" + e.detail() + ")");
  }
  const Matrix whiten = spd_inv_sqrt(composite_spd).matrix();
  Matrix s = whiten * c1.matrix() * whiten;
  s = 0.5 * (s + s.transpose());
  const auto eig = sym_eigen(s);

  const Eigen::Index c = s.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(c));
  std::iota(order.begin(), order.end(), 0);
  // descending eigenvalue, ties by eigenvector index
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return eig.values(a) > eig.values(b); });

  std::vector<Eigen::Index> picked;
  for (int p = 0; p < pairs; ++p) picked.push_back(order[static_cast<std::size_t>(p)]);
  for (int p = 0; p < pairs; ++p) picked.push_back(order[static_cast<std::size_t>(c - 1 - p)]);

  BinaryCsp out{Matrix(2 * pairs, c), Vector(2 * pairs)};
  for (std::size_t r = 0; r < picked.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    out.filters.row(row) = (whiten * eig.vectors.col(picked[r])).transpose();
    fix_sign(out.filters, row);
    out.eigenvalues(row) = eig.values(picked[r]);
  }
  return out;
}

}  // namespace

CspModel csp_fit(const std::map<Label, std::vector<SpdMatrix>>& covs_by_class, int pairs) {
  if (covs_by_class.size() < 2) throw Error(ErrorCode::MissingClass, "csp_fit needs at least two classes");
  Eigen::Index dim = -1;
  std::map<Label, SpdMatrix> means;
  for (const auto& [label, covs] : covs_by_class) {
    if (covs.empty()) throw Error(ErrorCode::MissingClass, "csp_fit: class " + std::to_string(label) + " is empty");
    means.emplace(label, arithmetic_mean_cov(covs));
    if (dim < 0) dim = covs.front().dim();
    if (covs.front().dim() != dim) throw Error(ErrorCode::DimMismatch, "csp_fit: classes differ in channel count");
  }
  if (pairs < 1 || 2 * pairs > dim) {
    throw Error(ErrorCode::InvalidConfig,
                "csp pairs must satisfy 1 <= pairs <= C/2, got " + std::to_string(pairs) + " for C=" + std::to_string(dim));
  }

  CspModel model;
  model.pairs = pairs;
  for (const auto& [label, _] : means) model.classes.push_back(label);

  if (means.size() == 2) {
    model.mode = CspMode::Binary;
    auto fit = binary_csp(means.begin()->second, std::next(means.begin())->second, pairs);
    model.filters = std::move(fit.filters);
    model.eigenvalues = std::move(fit.eigenvalues);
    return model;
  }

  model.mode = CspMode::OneVsRest;
  const auto m = static_cast<Eigen::Index>(means.size());
  model.filters.resize(2 * pairs * m, dim);
  model.eigenvalues.resize(2 * pairs * m);
  Eigen::Index row = 0;
  for (const auto& [label, _] : covs_by_class) {
    std::vector<SpdMatrix> rest;
    for (const auto& [other, covs] : covs_by_class)
      if (other != label) rest.insert(rest.end(), covs.begin(), covs.end());
    auto fit = binary_csp(means.at(label), arithmetic_mean_cov(rest), pairs);
    model.filters.middleRows(row, 2 * pairs) = fit.filters;
    model.eigenvalues.segment(row, 2 * pairs) = fit.eigenvalues;
    row += 2 * pairs;
  }
  return model;
}

FeatureVector csp_features(const CspModel& model, const Trial& x) {
  if (x.channels() != model.filters.cols()) {
    throw Error(ErrorCode::DimMismatch, "csp_features: trial has " + std::to_string(x.channels()) +
                                            " channels, filters expect " + std::to_string(model.filters.cols()));
  }
  const Matrix y = model.filters * x.data;
  const Eigen::Index t = y.cols();
  Vector var(y.rows());
  for (Eigen::Index f = 0; f < y.rows(); ++f) {
    const double mean = y.row(f).mean();
    const double ss = (y.row(f).array() - mean).square().sum();
    var(f) = t > 1 ? ss / static_cast<double>(t - 1) : ss;
  }
  const double total = var.sum();
  return {(var.array() / total).log().matrix(), FeatureKind::CspLogVar};
}

std::vector<FeatureVector> ts_features(const SpdMatrix& ref, std::span<const SpdMatrix> covs) {
  const TangentSpace space(ref);
  std::vector<FeatureVector> out;
  out.reserve(covs.size());
  for (const auto& c : covs) out.push_back({space.map(c).flat, FeatureKind::TangentSpace});
  return out;
}

}  // namespace lalign
