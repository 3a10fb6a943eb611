#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "lalign/data_io.hpp"
#include "lalign/error.hpp"
#include "lalign/experiment.hpp"
#include "support.hpp"

using namespace lalign;
using namespace lalign::testing;

namespace {

const char* kSmallScenario = R"({
  "version": 1,
  "source_labels": [1, 2],
  "target_labels": [3, 4],
  "strategies": ["raw", "ea", "la"],
  "pipeline": "ts-lda",
  "k_grid": {"start": 2, "stop": 6, "step": 2},
  "seed": 11,
  "data": {"synth": {"channels": 4, "samples": 120, "classes": 4, "trials_per_class": 10,
                     "subjects": 3, "class_separation": 1.0, "subject_shift": 1.0}}
})";

ScenarioSpec small_spec() { return parse_scenario(kSmallScenario); }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

std::string with(const std::string& key, const std::string& value) {
  // replaces the value of a top-level key in the small scenario
  std::string text = kSmallScenario;
  const auto at = text.find("\"" + key + "\"");
  REQUIRE(at != std::string::npos);
  const auto colon = text.find(':', at);
  auto end = text.find(",\n", colon);
  text.replace(colon + 1, end - colon - 1, " " + value);
  return text;
}

std::string slurp_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("scenario parsing") {
  TEST_CASE("object grid expands inclusively") {
    const auto s = small_spec();
    CHECK(s.k_grid == std::vector<int>{2, 4, 6});
    CHECK(s.pipelines == std::vector<PipelineKind>{PipelineKind::TsLda});
    CHECK(s.strategies.size() == 3);
    CHECK(s.seed == 11);
    REQUIRE(s.synth.has_value());
    CHECK(s.synth->channels == 4);
    CHECK(s.synth->classes == 4);
    CHECK_FALSE(s.manifest.has_value());
  }

  TEST_CASE("array grid and pipeline list") {
    const auto text = with("pipeline", "[\"csp-lda\", \"mdm\"]");
    const auto s = parse_scenario(with("k_grid", "[3, 5]"));
    CHECK(s.k_grid == std::vector<int>{3, 5});
    const auto p = parse_scenario(text);
    CHECK(p.pipelines == std::vector<PipelineKind>{PipelineKind::CspLda, PipelineKind::Mdm});
  }

  TEST_CASE("manifest paths resolve against the scenario directory") {
    const std::string text = R"({"source_labels": [1, 2], "target_labels": [1, 2], "k_grid": [2],
                                 "data": {"manifest": "m.json"}})";
    const auto s = parse_scenario(text, "/data/exp");
    REQUIRE(s.manifest.has_value());
    CHECK(*s.manifest == std::filesystem::path("/data/exp/m.json"));
  }

  TEST_CASE("configuration errors") {
    CHECK(code_of([] { parse_scenario("{"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("k_grid", "[4, 2]")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("k_grid", "[0, 2]")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("k_grid", "[]")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("k_grid", R"({"start": 2, "stop": 4, "step": 0})")); }) ==
          ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("strategies", "[\"coral\"]")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("pipeline", "\"knn\"")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("source_labels", "[1, 1]")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(with("source_labels", "[1]")); }) == ErrorCode::CardinalityMismatch);
    CHECK(code_of([] { parse_scenario(with("version", "2")); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(R"({"source_labels": [1, 2], "target_labels": [1, 2], "k_grid": [2],
                                          "data": {}})"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_scenario(R"({"target_labels": [1, 2], "k_grid": [2],
                                          "data": {"manifest": "m.json"}})"); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("json round trip") {
    const auto s = small_spec();
    const auto text = scenario_to_json(s);
    const auto back = parse_scenario(text);
    CHECK(scenario_to_json(back) == text);
    CHECK(back.k_grid == s.k_grid);
    CHECK(back.seed == s.seed);
  }

  TEST_CASE("fnv1a64 reference vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  }
}

TEST_SUITE("runner") {
  TEST_CASE("report shape") {
    const auto spec = small_spec();
    const auto r = run_scenario(spec);
    CHECK(r.accuracies.size() == 3 * 3 * 3);
    std::set<std::tuple<std::string, int, std::string>> keys;
    for (const auto& a : r.accuracies) {
      keys.emplace(a.subject, a.k, a.strategy);
      CHECK(a.accuracy >= 0.0);
      CHECK(a.accuracy <= 1.0);
      CHECK(a.pipeline == "ts-lda");
    }
    CHECK(keys.size() == 27);
    CHECK(r.aucs.size() == 3 * 3);
    CHECK(r.ttests.size() == 3);
    std::map<std::string, std::string> meta(r.metadata.begin(), r.metadata.end());
    CHECK(meta.at("seed") == "11");
    CHECK(meta.at("label_mapping").find("->") != std::string::npos);
    CHECK(meta.count("config_hash") == 1);
  }

  TEST_CASE("test sets exclude exactly the k labeled trials") {
    // 20 target-label trials per subject; accuracy * (20 - k) must be a count
    const auto r = run_scenario(small_spec());
    for (const auto& a : r.accuracies) {
      const double hits = a.accuracy * (20 - a.k);
      CHECK(std::fabs(hits - std::round(hits)) <= 1e-9);
    }
  }

  TEST_CASE("raw and ea agree without a subject shift") {
    auto spec = parse_scenario(R"({
      "source_labels": [1, 2], "target_labels": [1, 2], "strategies": ["raw", "ea"],
      "pipeline": "ts-lda", "k_grid": [4, 8], "seed": 5,
      "data": {"synth": {"channels": 4, "samples": 300, "classes": 2, "trials_per_class": 30,
                         "subjects": 3, "class_separation": 1.5, "subject_shift": 0.0}}})");
    const auto r = run_scenario(spec);
    std::map<std::pair<std::string, int>, std::map<std::string, double>> acc;
    for (const auto& a : r.accuracies) acc[{a.subject, a.k}][a.strategy] = a.accuracy;
    double raw_mean = 0, ea_mean = 0;
    for (const auto& [key, by] : acc) {
      raw_mean += by.at("raw");
      ea_mean += by.at("ea");
    }
    raw_mean /= static_cast<double>(acc.size());
    ea_mean /= static_cast<double>(acc.size());
    CHECK(std::fabs(raw_mean - ea_mean) <= 0.02);
  }

  TEST_CASE("same spec, same report, any job count") {
    const auto spec = small_spec();
    const auto a = render_report(run_scenario(spec, {1}), ReportFormat::Csv);
    const auto b = render_report(run_scenario(spec, {1}), ReportFormat::Csv);
    const auto c = render_report(run_scenario(spec, {3}), ReportFormat::Csv);
    CHECK(a == b);
    CHECK(a == c);
  }

  TEST_CASE("seed changes the report") {
    auto spec = small_spec();
    const auto a = render_report(run_scenario(spec), ReportFormat::Csv);
    spec.seed = 12;
    CHECK(render_report(run_scenario(spec), ReportFormat::Csv) != a);
  }

  TEST_CASE("golden report") {
    const std::filesystem::path dir = LALIGN_TEST_DATA_DIR;
    const auto text = render_report(run_scenario(read_scenario(dir / "small_scenario.json")), ReportFormat::Csv);
    const auto golden = slurp_text(dir / "small_scenario.csv");
    REQUIRE_FALSE(golden.empty());
    CHECK(text == golden);
  }

  TEST_CASE("k larger than the target pool is rejected") {
    auto spec = small_spec();
    spec.k_grid = {2, 20};
    CHECK(code_of([&] { run_scenario(spec); }) == ErrorCode::InvalidConfig);
  }

  TEST_CASE("manifest datasets with differing channel counts are rejected") {
    ScratchDir dir("exp_channels");
    CounterRng rng(3);
    DatasetManifest m;
    for (int s = 0; s < 2; ++s) {
      std::vector<Trial> trials;
      std::vector<Label> labels;
      for (int i = 0; i < 8; ++i) {
        trials.push_back(random_trial(rng, s == 0 ? 4 : 5, 50));
        labels.push_back(1 + i % 2);
      }
      const std::string name = "S" + std::to_string(s);
      write_trials(dir / (name + ".eegt"), trials);
      write_labels(dir / (name + ".labels"), labels);
      m.subjects.push_back({name, name + ".eegt", name + ".labels", 100.0, {1, 2}});
    }
    write_manifest(dir / "manifest.json", m);
    std::ofstream(dir / "scenario.json") << R"({"source_labels": [1, 2], "target_labels": [1, 2], "k_grid": [2],
                                               "data": {"manifest": "manifest.json"}})";
    const auto spec = read_scenario(dir / "scenario.json");
    try {
      run_scenario(spec);
      FAIL("expected InvalidConfig");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InvalidConfig);
      CHECK(std::string(e.what()).find("channels") != std::string::npos);
    }
  }
}
