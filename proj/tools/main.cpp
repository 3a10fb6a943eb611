// lalign command-line interface.
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lalign/alignment.hpp"
#include "lalign/data_io.hpp"
#include "lalign/error.hpp"
#include "lalign/experiment.hpp"
#include "lalign/features.hpp"
#include "lalign/pipeline.hpp"
#include "lalign/selection.hpp"

namespace fs = std::filesystem;
using namespace lalign;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());
}

std::vector<Label> labels_of(const std::vector<Trial>& trials) {
  std::vector<Label> out;
  for (const auto& t : trials) out.push_back(t.label.value_or(0));
  return out;
}

SubjectEntry write_subject(const fs::path& dir, const std::string& name, const std::vector<Trial>& trials,
                           double sample_rate, std::vector<Label> label_set) {
  SubjectEntry e{name, dir / (name + ".eegt"), dir / (name + ".labels"), sample_rate, std::move(label_set)};
  write_trials(e.trials, trials);
  write_labels(e.labels, labels_of(trials));
  return e;
}

std::vector<Trial> restrict_to(const std::vector<Trial>& trials, const std::vector<Label>& keep) {
  const std::set<Label> allowed(keep.begin(), keep.end());
  std::vector<Trial> out;
  for (const auto& t : trials)
    if (t.label && allowed.contains(*t.label)) out.push_back(t);
  return out;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  auto cfg = read_synth_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  const auto ds = generate_synthetic(cfg);
  ensure_dir(a.out);
  DatasetManifest manifest;
  for (const auto& s : ds.subjects) {
    manifest.subjects.push_back(write_subject(a.out, s.name, s.trials, s.sample_rate, s.label_set));
  }
  write_manifest(fs::path(a.out) / "manifest.json", manifest);
  // prototypes, one per class, as a trial file of C x C "trials"
  std::vector<Trial> protos;
  for (const auto& p : ds.prototypes) protos.push_back({p.matrix(), std::nullopt});
  write_trials(fs::path(a.out) / "prototypes.eegt", protos);
  std::printf("wrote %zu subjects to %s\n", ds.subjects.size(), a.out.c_str());
  return 0;
}

// ---------------------------------------------------------------- experiment

struct ExperimentArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string format = "csv";
};

int run_experiment(const ExperimentArgs& a) {
  auto spec = read_scenario(a.spec);
  if (a.seed) spec.seed = *a.seed;
  const auto report = run_scenario(spec, {a.jobs});
  emit_report(report, a.out, a.format == "json" ? ReportFormat::Json : ReportFormat::Csv);
  for (const auto& [k, v] : report.metadata) {
    if (k == "fallback_to_ea_count" && v != "0") std::fprintf(stderr, "note: LA fell back to EA %s time(s)\n", v.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------- align

struct AlignArgs {
  std::string strategy;
  std::string manifest;
  std::string out;
  std::string target;
  std::vector<Label> source_labels;
  std::vector<Label> target_labels;
  int k = 0;
  std::uint64_t seed = 0;
  double shrinkage = 0.0;
};

int run_align(const AlignArgs& a) {
  const Strategy strategy = parse_strategy(a.strategy);
  const auto subjects = load_dataset(read_manifest(a.manifest));
  ensure_dir(a.out);
  DatasetManifest out;

  const bool scenario = !a.source_labels.empty() || !a.target_labels.empty();
  if (strategy == Strategy::La && (!scenario || a.target.empty() || a.k < 1)) {
    throw Error(ErrorCode::InvalidConfig, "--strategy la needs --target, -k, --source-labels and --target-labels");
  }

  if (!scenario) {
    // whole-dataset alignment: raw copies, ea whitens every subject separately
    for (const auto& s : subjects) {
      auto trials = strategy == Strategy::Ea ? ea_align(ea_reference(s.trials, a.shrinkage), s.trials) : s.trials;
      out.subjects.push_back(write_subject(a.out, s.name, trials, s.sample_rate, s.label_set));
    }
    write_manifest(fs::path(a.out) / "manifest.json", out);
    return 0;
  }

  std::size_t target = subjects.size();
  for (std::size_t i = 0; i < subjects.size(); ++i)
    if (subjects[i].name == a.target) target = i;
  if (target == subjects.size()) throw Error(ErrorCode::InvalidConfig, "no subject named '" + a.target + "'");

  AlignRequest req;
  req.strategy = strategy;
  req.mapping = match_labels(a.source_labels, a.target_labels, a.seed);
  req.num_classes = a.target_labels.size();
  req.shrinkage = a.shrinkage;
  req.target_trials = restrict_to(subjects[target].trials, a.target_labels);
  std::vector<std::size_t> source_index;
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    if (i == target) continue;
    req.source_subjects.push_back(restrict_to(subjects[i].trials, a.source_labels));
    source_index.push_back(i);
  }
  if (a.k > 0) {
    const auto covs = trial_covariances(req.target_trials, a.shrinkage);
    req.labeled_target = k_medoids(pairwise_distances(covs), static_cast<std::size_t>(a.k)).medoids;
    for (auto i : req.labeled_target) req.labeled_target_labels.push_back(*req.target_trials[i].label);
  }
  const auto result = align(req);
  if (result.fell_back_to_ea) std::fprintf(stderr, "note: medoid labels cover fewer classes than needed; used EA\n");

  std::size_t offset = 0;
  for (std::size_t s = 0; s < req.source_subjects.size(); ++s) {
    const auto n = req.source_subjects[s].size();
    std::vector<Trial> part(result.source.begin() + static_cast<std::ptrdiff_t>(offset),
                            result.source.begin() + static_cast<std::ptrdiff_t>(offset + n));
    offset += n;
    const auto& subj = subjects[source_index[s]];
    out.subjects.push_back(write_subject(a.out, subj.name, part, subj.sample_rate, a.target_labels));
  }
  const auto& tsubj = subjects[target];
  out.subjects.push_back(write_subject(a.out, tsubj.name, result.target, tsubj.sample_rate, a.target_labels));
  write_manifest(fs::path(a.out) / "manifest.json", out);

  if (!req.labeled_target.empty()) {
    std::FILE* f = std::fopen((fs::path(a.out) / "labeled_target.txt").c_str(), "w");
    if (!f) throw Error(ErrorCode::Io, "cannot write labeled_target.txt");
    for (std::size_t i = 0; i < req.labeled_target.size(); ++i) {
      std::fprintf(f, "%zu %d\n", req.labeled_target[i], req.labeled_target_labels[i]);
    }
    std::fclose(f);
  }
  return 0;
}

// ---------------------------------------------------------------- kmedoids

struct KMedoidsArgs {
  std::string trials;
  int k = 0;
  double shrinkage = 0.0;
  int restarts = 0;
  std::uint64_t seed = 0;
};

int run_kmedoids(const KMedoidsArgs& a) {
  const auto trials = read_trials(a.trials);
  if (trials.empty()) throw Error(ErrorCode::EmptyInput, a.trials + " holds no trials");
  const auto covs = trial_covariances(trials, a.shrinkage);
  if (a.k < 1) throw Error(ErrorCode::KTooLarge, "k must be positive");
  const auto r = k_medoids(pairwise_distances(covs), static_cast<std::size_t>(a.k), {a.seed, a.restarts});
  for (auto m : r.medoids) std::printf("%zu\n", m);
  std::fprintf(stderr, "cost %.17g\n", r.cost);
  return 0;
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::string pipeline;
  std::string train;
  std::string train_labels;
  std::string test;
  std::string test_labels;
  std::string out;
  std::uint64_t seed = 0;
  double shrinkage = 0.0;
};

int run_classify(const ClassifyArgs& a) {
  PipelineOptions options;
  options.shrinkage = a.shrinkage;
  options.svm.seed = a.seed;
  const PipelineKind kind = parse_pipeline(a.pipeline);

  auto train = read_trials(a.train);
  const auto train_labels = read_labels(a.train_labels);
  if (train_labels.size() != train.size()) {
    throw Error(ErrorCode::BadLabelFile, a.train_labels + ": label count does not match " + a.train);
  }
  for (std::size_t i = 0; i < train.size(); ++i) train[i].label = train_labels[i];

  auto test = read_trials(a.test);
  const auto model = fit_pipeline(kind, train, options);
  const auto predicted = model.predict(test);
  if (!a.out.empty()) {
    write_labels(a.out, predicted);
  } else {
    for (Label l : predicted) std::printf("%d\n", l);
  }
  if (!a.test_labels.empty()) {
    const auto truth = read_labels(a.test_labels);
    if (truth.size() != test.size()) throw Error(ErrorCode::BadLabelFile, a.test_labels + ": label count mismatch");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) correct += predicted[i] == truth[i];
    std::fprintf(stderr, "accuracy %.6f (%zu/%zu)\n", static_cast<double>(correct) / truth.size(), correct, truth.size());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label alignment for cross-subject transfer on SPD covariances"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic multi-subject dataset");
  synth_cmd->add_option("--config", synth.config, "Synth config JSON")->required()->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Override the config seed");

  ExperimentArgs exp;
  auto* exp_cmd = app.add_subcommand("experiment", "Run a leave-one-subject-out scenario");
  exp_cmd->add_option("--spec", exp.spec, "Scenario JSON")->required()->check(CLI::ExistingFile);
  exp_cmd->add_option("--out", exp.out, "Report path")->required();
  exp_cmd->add_option("--seed", exp.seed, "Override the scenario seed");
  exp_cmd->add_option("--jobs", exp.jobs, "Parallel target subjects")->check(CLI::PositiveNumber);
  exp_cmd->add_option("--format", exp.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  AlignArgs al;
  auto* align_cmd = app.add_subcommand("align", "Align a dataset and write the aligned trials");
  align_cmd->add_option("--strategy", al.strategy, "raw, ea or la")->required()->check(CLI::IsMember({"raw", "ea", "la"}));
  align_cmd->add_option("--manifest", al.manifest, "Dataset manifest")->required()->check(CLI::ExistingFile);
  align_cmd->add_option("--out", al.out, "Output directory")->required();
  align_cmd->add_option("--target", al.target, "Target subject name");
  align_cmd->add_option("--source-labels", al.source_labels, "Source label set")->delimiter(',');
  align_cmd->add_option("--target-labels", al.target_labels, "Target label set")->delimiter(',');
  align_cmd->add_option("-k", al.k, "Number of target trials to label");
  align_cmd->add_option("--seed", al.seed, "Label-matching seed");
  align_cmd->add_option("--shrinkage", al.shrinkage, "Covariance shrinkage in [0, 1)");

  KMedoidsArgs km;
  auto* km_cmd = app.add_subcommand("kmedoids", "Select k medoid trials under the Riemannian distance");
  km_cmd->add_option("--trials", km.trials, "Trial file")->required()->check(CLI::ExistingFile);
  km_cmd->add_option("-k", km.k, "Number of medoids")->required();
  km_cmd->add_option("--shrinkage", km.shrinkage, "Covariance shrinkage in [0, 1)");
  km_cmd->add_option("--restarts", km.restarts, "Extra seeded random restarts");
  km_cmd->add_option("--seed", km.seed, "Restart seed");

  ClassifyArgs cl;
  auto* cl_cmd = app.add_subcommand("classify", "Train a pipeline and predict test trials");
  cl_cmd->add_option("--pipeline", cl.pipeline, "csp-lda, ts-svm, ts-lda or mdm")
      ->required()
      ->check(CLI::IsMember({"csp-lda", "ts-svm", "ts-lda", "mdm"}));
  cl_cmd->add_option("--train", cl.train, "Training trial file")->required()->check(CLI::ExistingFile);
  cl_cmd->add_option("--train-labels", cl.train_labels, "Training label file")->required()->check(CLI::ExistingFile);
  cl_cmd->add_option("--test", cl.test, "Test trial file")->required()->check(CLI::ExistingFile);
  cl_cmd->add_option("--test-labels", cl.test_labels, "Test labels, to report accuracy")->check(CLI::ExistingFile);
  cl_cmd->add_option("--out", cl.out, "Write predictions here instead of stdout");
  cl_cmd->add_option("--seed", cl.seed, "SVM seed");
  cl_cmd->add_option("--shrinkage", cl.shrinkage, "Covariance shrinkage in [0, 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth_cmd) return run_synth(synth);
    if (*exp_cmd) return run_experiment(exp);
    if (*align_cmd) return run_align(al);
    if (*km_cmd) return run_kmedoids(km);
    if (*cl_cmd) return run_classify(cl);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.category() == ErrorCategory::Config ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitConfig;
}
