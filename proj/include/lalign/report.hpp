#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lalign {

struct AccuracyRecord {
  std::string subject;
  int k = 0;
  std::string strategy;  // free-form so externally produced results can be merged
  std::string pipeline;
  double accuracy = 0.0;

  bool operator==(const AccuracyRecord&) const = default;
};

struct AucRecord {
  std::string subject;
  std::string strategy;
  std::string pipeline;
  double auc = 0.0;

  bool operator==(const AucRecord&) const = default;
};

struct TTestRecord {
  std::string strategy_a;
  std::string strategy_b;
  std::string pipeline;
  std::optional<double> t;  // empty when the differences have zero variance
  std::optional<double> p;

  bool operator==(const TTestRecord&) const = default;
};

struct ExperimentReport {
  std::vector<AccuracyRecord> accuracies;
  std::vector<AucRecord> aucs;
  std::vector<TTestRecord> ttests;
  std::vector<std::pair<std::string, std::string>> metadata;

  bool operator==(const ExperimentReport&) const = default;
};

enum class ReportFormat { Csv, Json };

/// Sorts every table by its key columns. Rendering the result is a pure
/// function of the report contents.
ExperimentReport canonicalized(ExperimentReport report);

/// CSV: four comma-separated tables divided by blank lines, in this order:
///   subject,k,strategy,pipeline,accuracy
///   subject,strategy,pipeline,auc
///   strategy_a,strategy_b,pipeline,t,p
///   key,value
/// Reals use %.17g; undefined t/p are written as "nan".
std::string render_report(const ExperimentReport& report, ReportFormat format);
ExperimentReport parse_report(const std::string& text, ReportFormat format);

void emit_report(const ExperimentReport& report, const std::filesystem::path& path, ReportFormat format);
ExperimentReport read_report(const std::filesystem::path& path, ReportFormat format);

}  // namespace lalign
