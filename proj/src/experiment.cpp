#include "lalign/experiment.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "lalign/error.hpp"
#include "lalign/features.hpp"
#include "lalign/selection.hpp"
#include "lalign/stats.hpp"

namespace lalign {

using Json = nlohmann::ordered_json;

namespace {

std::string slurp_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("malformed JSON: ") + e.what());
  }
}

SynthConfig synth_from_json(const Json& j) {
  SynthConfig c;
  c.channels = j.value("channels", c.channels);
  c.samples = j.value("samples", c.samples);
  c.classes = j.value("classes", c.classes);
  c.trials_per_class = j.value("trials_per_class", c.trials_per_class);
  c.subjects = j.value("subjects", c.subjects);
  c.class_separation = j.value("class_separation", c.class_separation);
  c.subject_shift = j.value("subject_shift", c.subject_shift);
  c.noise_df = j.value("noise_df", c.noise_df);
  c.seed = j.value("seed", c.seed);
  c.sample_rate = j.value("sample_rate", c.sample_rate);
  return c;
}

Json synth_to_json(const SynthConfig& c) {
  Json j;
  j["channels"] = c.channels;
  j["samples"] = c.samples;
  j["classes"] = c.classes;
  j["trials_per_class"] = c.trials_per_class;
  j["subjects"] = c.subjects;
  j["class_separation"] = c.class_separation;
  j["subject_shift"] = c.subject_shift;
  j["noise_df"] = c.noise_df;
  j["seed"] = c.seed;
  j["sample_rate"] = c.sample_rate;
  return j;
}

}  // namespace

SynthConfig parse_synth_config(const std::string& json_text) {
  try {
    auto c = synth_from_json(parse_json(json_text));
    validate(c);
    return c;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("synth config: ") + e.what());
  }
}

SynthConfig read_synth_config(const std::filesystem::path& path) { return parse_synth_config(slurp_text(path)); }

ScenarioSpec parse_scenario(const std::string& json_text, const std::filesystem::path& base_dir) {
  const Json j = parse_json(json_text);
  ScenarioSpec spec;
  try {
    if (j.value("version", 1) != 1) throw Error(ErrorCode::InvalidConfig, "unsupported scenario version");
    spec.source_labels = j.at("source_labels").get<std::vector<Label>>();
    spec.target_labels = j.at("target_labels").get<std::vector<Label>>();
    if (j.contains("strategies")) {
      spec.strategies.clear();
      for (const auto& s : j.at("strategies")) spec.strategies.push_back(parse_strategy(s.get<std::string>()));
    }
    if (j.contains("pipeline")) {
      spec.pipelines.clear();
      const auto& p = j.at("pipeline");
      if (p.is_array()) {
        for (const auto& name : p) spec.pipelines.push_back(parse_pipeline(name.get<std::string>()));
      } else {
        spec.pipelines.push_back(parse_pipeline(p.get<std::string>()));
      }
    }
    const auto& grid = j.at("k_grid");
    if (grid.is_array()) {
      spec.k_grid = grid.get<std::vector<int>>();
    } else {
      const int start = grid.at("start").get<int>();
      const int stop = grid.at("stop").get<int>();
      const int step = grid.at("step").get<int>();
      if (step < 1) throw Error(ErrorCode::InvalidConfig, "k_grid.step must be positive");
      for (int k = start; k <= stop; k += step) spec.k_grid.push_back(k);
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.options.shrinkage = j.value("shrinkage", 0.0);
    spec.options.csp_pairs = j.value("csp_pairs", kDefaultCspPairs);
    if (j.contains("svm")) {
      spec.options.svm.lambda = j.at("svm").value("lambda", spec.options.svm.lambda);
      spec.options.svm.epochs = j.at("svm").value("epochs", spec.options.svm.epochs);
    }
    const auto& data = j.at("data");
    if (data.contains("synth")) spec.synth = synth_from_json(data.at("synth"));
    if (data.contains("manifest")) spec.manifest = base_dir / data.at("manifest").get<std::string>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("scenario: ") + e.what());
  }
  validate(spec);
  return spec;
}

ScenarioSpec read_scenario(const std::filesystem::path& path) {
  return parse_scenario(slurp_text(path), path.parent_path());
}

std::string scenario_to_json(const ScenarioSpec& spec) {
  Json j;
  j["version"] = 1;
  j["source_labels"] = spec.source_labels;
  j["target_labels"] = spec.target_labels;
  j["strategies"] = Json::array();
  for (auto s : spec.strategies) j["strategies"].push_back(std::string(strategy_name(s)));
  j["pipeline"] = Json::array();
  for (auto p : spec.pipelines) j["pipeline"].push_back(std::string(pipeline_name(p)));
  j["k_grid"] = spec.k_grid;
  j["seed"] = spec.seed;
  j["shrinkage"] = spec.options.shrinkage;
  j["csp_pairs"] = spec.options.csp_pairs;
  j["svm"] = {{"lambda", spec.options.svm.lambda}, {"epochs", spec.options.svm.epochs}};
  if (spec.synth) j["data"]["synth"] = synth_to_json(*spec.synth);
  if (spec.manifest) j["data"]["manifest"] = spec.manifest->generic_string();
  return j.dump();
}

void validate(const ScenarioSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, "scenario: " + what); };
  if (spec.source_labels.empty()) fail("source_labels is empty");
  if (spec.source_labels.size() != spec.target_labels.size()) {
    throw Error(ErrorCode::CardinalityMismatch, "scenario: source_labels and target_labels differ in size");
  }
  if (std::set<Label>(spec.source_labels.begin(), spec.source_labels.end()).size() != spec.source_labels.size() ||
      std::set<Label>(spec.target_labels.begin(), spec.target_labels.end()).size() != spec.target_labels.size()) {
    fail("label sets contain duplicates");
  }
  if (spec.source_labels.size() < 2) fail("at least two classes are required");
  if (spec.strategies.empty()) fail("strategies is empty");
  if (spec.pipelines.empty()) fail("pipeline is empty");
  if (spec.k_grid.empty()) fail("k_grid is empty");
  for (std::size_t i = 0; i < spec.k_grid.size(); ++i) {
    if (spec.k_grid[i] < 1) fail("k_grid values must be positive");
    if (i > 0 && spec.k_grid[i] <= spec.k_grid[i - 1]) fail("k_grid must be strictly ascending");
  }
  if (spec.synth.has_value() == spec.manifest.has_value()) fail("data needs exactly one of 'synth' or 'manifest'");
  if (spec.synth) validate(*spec.synth);
  if (!(spec.options.shrinkage >= 0.0 && spec.options.shrinkage < 1.0)) fail("shrinkage must lie in [0, 1)");
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<SubjectData> load_scenario_data(const ScenarioSpec& spec) {
  if (spec.synth) {
    SynthConfig cfg = *spec.synth;
    cfg.seed = spec.seed;
    return generate_synthetic(cfg).subjects;
  }
  return load_dataset(read_manifest(*spec.manifest));
}

namespace {

struct UnitResult {
  std::vector<AccuracyRecord> accuracies;
  std::vector<std::string> fallbacks;
};

std::vector<Trial> with_labels_in(const std::vector<Trial>& trials, const std::set<Label>& keep) {
  std::vector<Trial> out;
  for (const auto& t : trials)
    if (t.label && keep.contains(*t.label)) out.push_back(t);
  return out;
}

UnitResult evaluate_target(const ScenarioSpec& spec, const std::vector<SubjectData>& subjects, std::size_t target,
                           const LabelMapping& mapping) {
  const std::set<Label> src_set(spec.source_labels.begin(), spec.source_labels.end());
  const std::set<Label> tgt_set(spec.target_labels.begin(), spec.target_labels.end());

  AlignRequest base;
  base.mapping = mapping;
  base.num_classes = spec.target_labels.size();
  base.shrinkage = spec.options.shrinkage;
  base.target_trials = with_labels_in(subjects[target].trials, tgt_set);
  for (std::size_t s = 0; s < subjects.size(); ++s) {
    if (s == target) continue;
    base.source_subjects.push_back(with_labels_in(subjects[s].trials, src_set));
  }

  const auto covs = trial_covariances(base.target_trials, spec.options.shrinkage);
  const auto distances = pairwise_distances(covs);

  PipelineOptions options = spec.options;
  options.svm.seed = spec.seed;

  UnitResult out;
  for (int k : spec.k_grid) {
    const auto medoids = k_medoids(distances, static_cast<std::size_t>(k)).medoids;
    std::vector<Label> medoid_labels;
    for (auto i : medoids) medoid_labels.push_back(*base.target_trials[i].label);
    std::vector<bool> labeled(base.target_trials.size(), false);
    for (auto i : medoids) labeled[i] = true;

    for (Strategy strategy : spec.strategies) {
      AlignRequest req = base;
      req.strategy = strategy;
      req.labeled_target = medoids;
      req.labeled_target_labels = medoid_labels;
      auto aligned = align(req);
      if (aligned.fell_back_to_ea) {
        out.fallbacks.push_back(subjects[target].name + ":k=" + std::to_string(k));
      }
      std::vector<Trial> train = std::move(aligned.source);
      std::vector<Trial> test;
      for (std::size_t i = 0; i < aligned.target.size(); ++i) {
        (labeled[i] ? train : test).push_back(std::move(aligned.target[i]));
      }
      for (PipelineKind pipeline : spec.pipelines) {
        const auto model = fit_pipeline(pipeline, train, options);
        out.accuracies.push_back({subjects[target].name, k, std::string(strategy_name(strategy)),
                                  std::string(pipeline_name(pipeline)), accuracy(model, test)});
      }
    }
  }
  return out;
}

}  // namespace

ExperimentReport run_scenario(const ScenarioSpec& spec, const RunOptions& options) {
  validate(spec);
  const auto subjects = load_scenario_data(spec);
  if (subjects.size() < 2) throw Error(ErrorCode::InvalidConfig, "need at least two subjects");

  const Eigen::Index channels = subjects.front().trials.empty() ? 0 : subjects.front().trials.front().channels();
  const std::set<Label> tgt_set(spec.target_labels.begin(), spec.target_labels.end());
  const std::set<Label> src_set(spec.source_labels.begin(), spec.source_labels.end());
  for (const auto& s : subjects) {
    for (const auto& t : s.trials) {
      if (t.channels() != channels) {
        throw Error(ErrorCode::InvalidConfig, "subject " + s.name + " has " + std::to_string(t.channels()) +
                                                  " channels, expected " + std::to_string(channels) +
                                                  "; differing feature spaces are not supported");
      }
    }
    const auto n_target = with_labels_in(s.trials, tgt_set).size();
    if (n_target < static_cast<std::size_t>(spec.k_grid.back()) + 1) {
      throw Error(ErrorCode::InvalidConfig, "subject " + s.name + " has " + std::to_string(n_target) +
                                                " target-label trials; k=" + std::to_string(spec.k_grid.back()) +
                                                " needs more");
    }
    for (Label l : src_set) {
      if (std::none_of(s.trials.begin(), s.trials.end(), [&](const Trial& t) { return t.label == l; })) {
        throw Error(ErrorCode::InvalidConfig, "subject " + s.name + " has no trials with source label " +
                                                  std::to_string(l));
      }
    }
  }

  const auto mapping = match_labels(spec.source_labels, spec.target_labels, spec.seed);

  std::vector<UnitResult> units(subjects.size());
  std::vector<std::exception_ptr> errors(subjects.size());
  const long n = static_cast<long>(subjects.size());
  const int jobs = std::max(1, options.jobs);
#pragma omp parallel for num_threads(jobs) schedule(dynamic, 1)
  for (long t = 0; t < n; ++t) {
    try {
      units[static_cast<std::size_t>(t)] = evaluate_target(spec, subjects, static_cast<std::size_t>(t), mapping);
    } catch (...) {
      errors[static_cast<std::size_t>(t)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentReport report;
  std::vector<std::string> fallbacks;
  for (auto& u : units) {
    report.accuracies.insert(report.accuracies.end(), u.accuracies.begin(), u.accuracies.end());
    fallbacks.insert(fallbacks.end(), u.fallbacks.begin(), u.fallbacks.end());
  }

  // AUC per (subject, strategy, pipeline) over the k grid
  for (const auto& s : subjects) {
    for (Strategy strategy : spec.strategies) {
      for (PipelineKind pipeline : spec.pipelines) {
        std::vector<CurvePoint> curve;
        for (const auto& r : report.accuracies) {
          if (r.subject == s.name && r.strategy == strategy_name(strategy) && r.pipeline == pipeline_name(pipeline)) {
            curve.push_back({static_cast<double>(r.k), r.accuracy});
          }
        }
        std::sort(curve.begin(), curve.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
        if (curve.size() >= 2) {
          report.aucs.push_back({s.name, std::string(strategy_name(strategy)), std::string(pipeline_name(pipeline)),
                                 auc_over_k(curve)});
        }
      }
    }
  }

  for (PipelineKind pipeline : spec.pipelines) {
    for (std::size_t a = 0; a < spec.strategies.size(); ++a) {
      for (std::size_t b = a + 1; b < spec.strategies.size(); ++b) {
        std::vector<double> xa;
        std::vector<double> xb;
        for (const auto& s : subjects) {
          for (const auto& r : report.aucs) {
            if (r.subject != s.name || r.pipeline != pipeline_name(pipeline)) continue;
            if (r.strategy == strategy_name(spec.strategies[a])) xa.push_back(r.auc);
            if (r.strategy == strategy_name(spec.strategies[b])) xb.push_back(r.auc);
          }
        }
        if (xa.size() < 2 || xa.size() != xb.size()) continue;
        TTestRecord rec{std::string(strategy_name(spec.strategies[a])), std::string(strategy_name(spec.strategies[b])),
                        std::string(pipeline_name(pipeline)), std::nullopt, std::nullopt};
        try {
          const auto tt = paired_t_test(xa, xb);
          rec.t = tt.t;
          rec.p = tt.p;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::ZeroVariance) throw;
        }
        report.ttests.push_back(rec);
      }
    }
  }

  std::sort(fallbacks.begin(), fallbacks.end());
  std::string mapping_text;
  for (const auto& [s, t] : mapping.pairs) {
    if (!mapping_text.empty()) mapping_text += ' ';
    mapping_text += std::to_string(s) + "->" + std::to_string(t);
  }
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a64(scenario_to_json(spec))));
  report.metadata.emplace_back("seed", std::to_string(spec.seed));
  report.metadata.emplace_back("config_hash", hash);
  report.metadata.emplace_back("label_mapping", mapping_text);
  report.metadata.emplace_back("fallback_to_ea_count", std::to_string(fallbacks.size()));
  for (const auto& f : fallbacks) report.metadata.emplace_back("fallback_to_ea", f);
  return canonicalized(std::move(report));
}

}  // namespace lalign
