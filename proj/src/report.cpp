#include "lalign/report.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "lalign/error.hpp"

namespace lalign {

ExperimentReport canonicalized(ExperimentReport r) {
  std::sort(r.accuracies.begin(), r.accuracies.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject, a.k, a.strategy, a.pipeline) < std::tie(b.subject, b.k, b.strategy, b.pipeline);
  });
  std::sort(r.aucs.begin(), r.aucs.end(), [](const auto& a, const auto& b) {
    return std::tie(a.subject, a.strategy, a.pipeline) < std::tie(b.subject, b.strategy, b.pipeline);
  });
  std::sort(r.ttests.begin(), r.ttests.end(), [](const auto& a, const auto& b) {
    return std::tie(a.strategy_a, a.strategy_b, a.pipeline) < std::tie(b.strategy_a, b.strategy_b, b.pipeline);
  });
  return r;
}

namespace {

std::string real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string real(const std::optional<double>& v) { return v ? real(*v) : "nan"; }

double parse_real(const std::string& s) {
  if (s == "nan") return std::nan("");
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(ErrorCode::BadReport, "report: not a number: '" + s + "'");
  return v;
}

int parse_int(const std::string& s) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0' || v < INT_MIN || v > INT_MAX) {
    throw Error(ErrorCode::BadReport, "report: not an integer: '" + s + "'");
  }
  return static_cast<int>(v);
}

std::optional<double> parse_optional_real(const std::string& s) {
  const double v = parse_real(s);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string render_csv(const ExperimentReport& r) {
  std::string out = "subject,k,strategy,pipeline,accuracy\n";
  for (const auto& a : r.accuracies) {
    out += a.subject + ',' + std::to_string(a.k) + ',' + a.strategy + ',' + a.pipeline + ',' + real(a.accuracy) + '\n';
  }
  out += "\nsubject,strategy,pipeline,auc\n";
  for (const auto& a : r.aucs) out += a.subject + ',' + a.strategy + ',' + a.pipeline + ',' + real(a.auc) + '\n';
  out += "\nstrategy_a,strategy_b,pipeline,t,p\n";
  for (const auto& t : r.ttests) {
    out += t.strategy_a + ',' + t.strategy_b + ',' + t.pipeline + ',' + real(t.t) + ',' + real(t.p) + '\n';
  }
  out += "\nkey,value\n";
  for (const auto& [k, v] : r.metadata) out += k + ',' + v + '\n';
  return out;
}

ExperimentReport parse_csv(const std::string& text) {
  ExperimentReport r;
  std::istringstream in(text);
  std::string line;
  int section = -1;
  bool expect_header = true;
  const char* headers[] = {"subject,k,strategy,pipeline,accuracy", "subject,strategy,pipeline,auc",
                           "strategy_a,strategy_b,pipeline,t,p", "key,value"};
  while (std::getline(in, line)) {
    if (line.empty()) {
      expect_header = true;
      continue;
    }
    if (expect_header) {
      ++section;
      if (section > 3 || line != headers[section]) {
        throw Error(ErrorCode::BadReport, "report: unexpected header '" + line + "'");
      }
      expect_header = false;
      continue;
    }
    const auto f = split_csv(line);
    auto need = [&](std::size_t n) {
      if (f.size() != n) throw Error(ErrorCode::BadReport, "report: malformed row '" + line + "'");
    };
    switch (section) {
      case 0:
        need(5);
        r.accuracies.push_back({f[0], parse_int(f[1]), f[2], f[3], parse_real(f[4])});
        break;
      case 1:
        need(4);
        r.aucs.push_back({f[0], f[1], f[2], parse_real(f[3])});
        break;
      case 2:
        need(5);
        r.ttests.push_back({f[0], f[1], f[2], parse_optional_real(f[3]), parse_optional_real(f[4])});
        break;
      default:
        need(2);
        r.metadata.emplace_back(f[0], f[1]);
    }
  }
  return r;
}

using Json = nlohmann::ordered_json;

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::string render_json(const ExperimentReport& r) {
  Json j;
  j["accuracies"] = Json::array();
  for (const auto& a : r.accuracies) {
    j["accuracies"].push_back(
        {{"subject", a.subject}, {"k", a.k}, {"strategy", a.strategy}, {"pipeline", a.pipeline}, {"accuracy", a.accuracy}});
  }
  j["aucs"] = Json::array();
  for (const auto& a : r.aucs) {
    j["aucs"].push_back({{"subject", a.subject}, {"strategy", a.strategy}, {"pipeline", a.pipeline}, {"auc", a.auc}});
  }
  j["ttests"] = Json::array();
  for (const auto& t : r.ttests) {
    j["ttests"].push_back({{"strategy_a", t.strategy_a},
                           {"strategy_b", t.strategy_b},
                           {"pipeline", t.pipeline},
                           {"t", optional_json(t.t)},
                           {"p", optional_json(t.p)}});
  }
  j["metadata"] = Json::array();
  for (const auto& [k, v] : r.metadata) j["metadata"].push_back({k, v});
  return j.dump(2) + '\n';
}

std::optional<double> optional_from(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

ExperimentReport parse_json_report(const std::string& text) {
  ExperimentReport r;
  try {
    const Json j = Json::parse(text);
    for (const auto& a : j.at("accuracies")) {
      r.accuracies.push_back({a.at("subject"), a.at("k"), a.at("strategy"), a.at("pipeline"), a.at("accuracy")});
    }
    for (const auto& a : j.at("aucs")) r.aucs.push_back({a.at("subject"), a.at("strategy"), a.at("pipeline"), a.at("auc")});
    for (const auto& t : j.at("ttests")) {
      r.ttests.push_back({t.at("strategy_a"), t.at("strategy_b"), t.at("pipeline"), optional_from(t.at("t")),
                          optional_from(t.at("p"))});
    }
    for (const auto& m : j.at("metadata")) r.metadata.emplace_back(m.at(0), m.at(1));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::BadReport, std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace

std::string render_report(const ExperimentReport& report, ReportFormat format) {
  const auto r = canonicalized(report);
  return format == ReportFormat::Csv ? render_csv(r) : render_json(r);
}

ExperimentReport parse_report(const std::string& text, ReportFormat format) {
  return format == ReportFormat::Csv ? parse_csv(text) : parse_json_report(text);
}

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format) {
  const auto text = render_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write report to " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

ExperimentReport read_report(const std::filesystem::path& path, ReportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open report " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_report(ss.str(), format);
}

}  // namespace lalign
