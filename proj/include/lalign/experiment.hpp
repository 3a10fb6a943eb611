#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lalign/alignment.hpp"
#include "lalign/data_io.hpp"
#include "lalign/pipeline.hpp"
#include "lalign/report.hpp"

namespace lalign {

/// One cross-subject transfer experiment: every subject serves once as the
/// target, all others as sources.
struct ScenarioSpec {
  std::vector<Label> source_labels;
  std::vector<Label> target_labels;
  std::vector<Strategy> strategies{Strategy::Raw, Strategy::Ea, Strategy::La};
  std::vector<PipelineKind> pipelines{PipelineKind::CspLda};
  std::vector<int> k_grid;  // ascending, positive
  std::uint64_t seed = 0;  // drives the generator, label matching and the SVM
  std::optional<SynthConfig> synth;  // exactly one of synth / manifest
  std::optional<std::filesystem::path> manifest;
  PipelineOptions options;
};

/// JSON schema (version 1):
///   {"version": 1, "source_labels": [1, 2], "target_labels": [3, 4],
///    "strategies": ["raw", "ea", "la"], "pipeline": "csp-lda" | [...],
///    "k_grid": [2, 4, ...] | {"start": 2, "stop": 20, "step": 2},
///    "seed": 7, "shrinkage": 0.0, "csp_pairs": 3,
///    "svm": {"lambda": 1e-3, "epochs": 200},
///    "data": {"synth": {...SynthConfig fields...}} | {"manifest": "path"}}
/// The synth block's own seed is ignored; the scenario seed is used.
ScenarioSpec parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir = {});
ScenarioSpec read_scenario(const std::filesystem::path& path);
std::string scenario_to_json(const ScenarioSpec& spec);
SynthConfig parse_synth_config(const std::string& json_text);
SynthConfig read_synth_config(const std::filesystem::path& path);

/// Throws InvalidConfig naming the offending field.
void validate(const ScenarioSpec& spec);

struct RunOptions {
  int jobs = 1;
};

/// Leave-one-subject-out evaluation. For each (target subject, k) the k
/// medoids of the target covariances are labeled once and shared by every
/// strategy: they join the training set and never appear in the test set.
/// LA fallbacks to EA are listed in the report metadata.
ExperimentReport run_scenario(const ScenarioSpec& spec, const RunOptions& options = {});

/// Subjects for a scenario, from the synth config or the manifest.
std::vector<SubjectData> load_scenario_data(const ScenarioSpec& spec);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace lalign
