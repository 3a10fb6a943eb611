#include "lalign/pipeline.hpp"

#include <map>
#include <string>

#include "lalign/error.hpp"

namespace lalign {

std::string_view pipeline_name(PipelineKind kind) {
  switch (kind) {
    case PipelineKind::CspLda: return "csp-lda";
    case PipelineKind::TsSvm: return "ts-svm";
    case PipelineKind::TsLda: return "ts-lda";
    case PipelineKind::Mdm: return "mdm";
  }
  return "?";
}

PipelineKind parse_pipeline(std::string_view name) {
  if (name == "csp-lda") return PipelineKind::CspLda;
  if (name == "ts-svm") return PipelineKind::TsSvm;
  if (name == "ts-lda") return PipelineKind::TsLda;
  if (name == "mdm") return PipelineKind::Mdm;
  throw Error(ErrorCode::InvalidConfig, "unknown pipeline '" + std::string(name) + "'");
}

namespace {

std::vector<Label> labels_of(std::span<const Trial> trials) {
  std::vector<Label> out;
  out.reserve(trials.size());
  for (const auto& t : trials) {
    if (!t.label) throw Error(ErrorCode::UnknownLabel, "training trial without a label");
    out.push_back(*t.label);
  }
  return out;
}

std::vector<Vector> values_of(std::vector<FeatureVector> fs) {
  std::vector<Vector> out;
  out.reserve(fs.size());
  for (auto& f : fs) out.push_back(std::move(f.values));
  return out;
}

}  // namespace

TrainedPipeline fit_pipeline(PipelineKind kind, std::span<const Trial> train, const PipelineOptions& options) {
  if (train.empty()) throw Error(ErrorCode::EmptyInput, "no training trials");
  const auto labels = labels_of(train);
  const auto covs = trial_covariances(train, options.shrinkage);

  TrainedPipeline p;
  p.kind_ = kind;
  p.shrinkage_ = options.shrinkage;
  switch (kind) {
    case PipelineKind::CspLda: {
      std::map<Label, std::vector<SpdMatrix>> by_class;
      for (std::size_t i = 0; i < covs.size(); ++i) by_class[labels[i]].push_back(covs[i]);
      auto csp = csp_fit(by_class, options.csp_pairs);
      std::vector<Vector> feats;
      feats.reserve(train.size());
      for (const auto& t : train) feats.push_back(csp_features(csp, t).values);
      auto lda = lda_fit(feats, labels, options.lda_gamma);
      p.state_ = TrainedPipeline::CspLdaState{std::move(csp), std::move(lda)};
      break;
    }
    case PipelineKind::TsSvm:
    case PipelineKind::TsLda: {
      auto ref = log_euclidean_mean(covs);
      const auto feats = values_of(ts_features(ref, covs));
      TrainedPipeline::TsState state{ref, LdaModel{}};
      if (kind == PipelineKind::TsLda) {
        state.classifier = lda_fit(feats, labels, options.lda_gamma);
      } else {
        state.classifier = svm_fit(feats, labels, options.svm);
      }
      p.state_ = std::move(state);
      break;
    }
    case PipelineKind::Mdm:
      p.state_ = mdm_fit(covs, labels);
      break;
  }
  return p;
}

Label TrainedPipeline::predict(const Trial& x) const {
  return predict(std::span<const Trial>(&x, 1)).front();
}

std::vector<Label> TrainedPipeline::predict(std::span<const Trial> xs) const {
  std::vector<Label> out;
  out.reserve(xs.size());
  if (const auto* s = std::get_if<CspLdaState>(&state_)) {
    for (const auto& x : xs) out.push_back(lda_predict(s->lda, csp_features(s->csp, x).values));
    return out;
  }
  const auto covs = trial_covariances(xs, shrinkage_);
  if (const auto* s = std::get_if<TsState>(&state_)) {
    const auto feats = values_of(ts_features(s->ref, covs));
    for (const auto& f : feats) {
      if (const auto* lda = std::get_if<LdaModel>(&s->classifier)) {
        out.push_back(lda_predict(*lda, f));
      } else {
        out.push_back(svm_predict(std::get<LinearSvmModel>(s->classifier), f));
      }
    }
    return out;
  }
  const auto& mdm = std::get<MdmModel>(state_);
  for (const auto& c : covs) out.push_back(mdm_predict(mdm, c));
  return out;
}

double accuracy(const TrainedPipeline& model, std::span<const Trial> test) {
  if (test.empty()) throw Error(ErrorCode::EmptyInput, "no test trials");
  const auto predicted = model.predict(test);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!test[i].label) throw Error(ErrorCode::UnknownLabel, "test trial without a label");
    if (predicted[i] == *test[i].label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

}  // namespace lalign
