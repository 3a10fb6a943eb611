#include <doctest.h>

#include <cmath>

#include "lalign/error.hpp"
#include "lalign/report.hpp"
#include "support.hpp"

using namespace lalign;
using namespace lalign::testing;

namespace {

ExperimentReport sample_report() {
  ExperimentReport r;
  r.accuracies = {{"S02", 4, "la", "csp-lda", 0.75},
                  {"S01", 2, "raw", "csp-lda", 1.0 / 3.0},
                  {"S01", 2, "ea", "csp-lda", 0.1 + 0.2}};
  r.aucs = {{"S01", "raw", "csp-lda", 12.345678901234567}, {"S01", "ea", "csp-lda", 1e-300}};
  r.ttests = {{"raw", "la", "csp-lda", -3.25, 0.0123}, {"ea", "la", "csp-lda", std::nullopt, std::nullopt}};
  r.metadata = {{"seed", "7"}, {"label_mapping", "1->3 2->4"}};
  return r;
}

}  // namespace

TEST_CASE("empty report round trips") {
  for (auto fmt : {ReportFormat::Csv, ReportFormat::Json}) {
    const ExperimentReport empty;
    CHECK(parse_report(render_report(empty, fmt), fmt) == empty);
  }
}

TEST_CASE("csv layout") {
  const auto text = render_report(sample_report(), ReportFormat::Csv);
  const std::string expected =
      "subject,k,strategy,pipeline,accuracy\n"
      "S01,2,ea,csp-lda,0.30000000000000004\n"
      "S01,2,raw,csp-lda,0.33333333333333331\n"
      "S02,4,la,csp-lda,0.75\n"
      "\n"
      "subject,strategy,pipeline,auc\n"
      "S01,ea,csp-lda,1e-300\n"
      "S01,raw,csp-lda,12.345678901234567\n"
      "\n"
      "strategy_a,strategy_b,pipeline,t,p\n"
      "ea,la,csp-lda,nan,nan\n"
      "raw,la,csp-lda,-3.25,0.0123\n"
      "\n"
      "key,value\n"
      "seed,7\n"
      "label_mapping,1->3 2->4\n";
  CHECK(text == expected);
}

TEST_CASE("round trips are exact in both formats") {
  for (auto fmt : {ReportFormat::Csv, ReportFormat::Json}) {
    const auto r = canonicalized(sample_report());
    const auto back = parse_report(render_report(r, fmt), fmt);
    CHECK(back == r);
    CHECK(render_report(back, fmt) == render_report(r, fmt));
  }
}

TEST_CASE("rendering ignores input order") {
  auto r = sample_report();
  const auto a = render_report(r, ReportFormat::Csv);
  std::swap(r.accuracies[0], r.accuracies[2]);
  std::swap(r.aucs[0], r.aucs[1]);
  CHECK(render_report(r, ReportFormat::Csv) == a);
}

TEST_CASE("emit and read through a file") {
  ScratchDir dir("report");
  const auto r = canonicalized(sample_report());
  emit_report(r, dir / "r.csv", ReportFormat::Csv);
  CHECK(read_report(dir / "r.csv", ReportFormat::Csv) == r);
  emit_report(r, dir / "r.json", ReportFormat::Json);
  CHECK(read_report(dir / "r.json", ReportFormat::Json) == r);
  try {
    emit_report(r, dir / "no/such/dir/r.csv", ReportFormat::Csv);
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
    CHECK(std::string(e.what()).find("no/such/dir") != std::string::npos);
  }
}

TEST_CASE("malformed reports") {
  auto code = [](const std::string& text, ReportFormat fmt) {
    try {
      parse_report(text, fmt);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code("subject,k\n", ReportFormat::Csv) == ErrorCode::BadReport);
  CHECK(code("subject,k,strategy,pipeline,accuracy\nS01,x,raw,csp-lda,0.5\n", ReportFormat::Csv) == ErrorCode::BadReport);
  CHECK(code("subject,k,strategy,pipeline,accuracy\nS01,2,raw,csp-lda,abc\n", ReportFormat::Csv) == ErrorCode::BadReport);
  CHECK(code("subject,k,strategy,pipeline,accuracy\nS01,2,raw\n", ReportFormat::Csv) == ErrorCode::BadReport);
  CHECK(code("{\"accuracies\": 3}", ReportFormat::Json) == ErrorCode::BadReport);
  CHECK(code("not json", ReportFormat::Json) == ErrorCode::BadReport);
}
