#pragma once

#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "lalign/classify.hpp"
#include "lalign/features.hpp"

namespace lalign {

enum class PipelineKind { CspLda, TsSvm, TsLda, Mdm };

std::string_view pipeline_name(PipelineKind kind);
/// Throws InvalidConfig for unknown names.
PipelineKind parse_pipeline(std::string_view name);

struct PipelineOptions {
  int csp_pairs = kDefaultCspPairs;
  double shrinkage = 0.0;
  double lda_gamma = kLdaShrinkage;
  SvmParams svm;
};

/// A fitted feature extractor + classifier.
class TrainedPipeline {
 public:
  Label predict(const Trial& x) const;
  std::vector<Label> predict(std::span<const Trial> xs) const;
  PipelineKind kind() const { return kind_; }

  friend TrainedPipeline fit_pipeline(PipelineKind, std::span<const Trial>, const PipelineOptions&);

 private:
  struct CspLdaState {
    CspModel csp;
    LdaModel lda;
  };
  struct TsState {
    SpdMatrix ref;
    std::variant<LdaModel, LinearSvmModel> classifier;
  };

  PipelineKind kind_ = PipelineKind::TsLda;
  double shrinkage_ = 0.0;
  std::variant<CspLdaState, TsState, MdmModel> state_;
};

/// Trains on labeled trials. The tangent-space reference is the
/// Log-Euclidean mean of all training covariances.
TrainedPipeline fit_pipeline(PipelineKind kind, std::span<const Trial> train, const PipelineOptions& options = {});

/// Fraction of trials whose prediction matches their label.
double accuracy(const TrainedPipeline& model, std::span<const Trial> test);

}  // namespace lalign
