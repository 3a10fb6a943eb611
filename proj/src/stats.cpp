#include "lalign/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lalign/error.hpp"

namespace lalign {

double auc_over_k(std::span<const CurvePoint> curve) {
  if (curve.size() < 2) throw Error(ErrorCode::TooFewPoints, "AUC needs at least two points");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dk = curve[i].k - curve[i - 1].k;
    if (!(dk > 0.0)) throw Error(ErrorCode::InvalidConfig, "k must be strictly increasing");
    area += 0.5 * dk * (curve[i].accuracy + curve[i - 1].accuracy);
  }
  return area;
}

namespace {

// Continued fraction for I_x(a, b), valid for x < (a + 1) / (a + b + 2).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::InvalidConfig, "incomplete beta continued fraction did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "incomplete beta needs a, b > 0 and x in [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0.0)) throw Error(ErrorCode::InvalidConfig, "degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(0.5 * dof, 0.5, dof / (dof + t * t));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimMismatch, "paired samples differ in length: " + std::to_string(a.size()) + " vs " +
                                            std::to_string(b.size()));
  }
  const std::size_t n = a.size();
  if (n < 2) throw Error(ErrorCode::TooFewPoints, "paired t-test needs at least two pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  bool all_equal = true;
  const double first = a[0] - b[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    all_equal = all_equal && d == first;
    ss += (d - mean) * (d - mean);
  }
  if (all_equal || ss == 0.0) throw Error(ErrorCode::ZeroVariance, "all paired differences are equal; t is undefined");
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  TTestResult r;
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p = student_t_two_sided_p(r.t, static_cast<double>(n - 1));
  return r;
}

}  // namespace lalign
