#pragma once

#include <span>
#include <utility>

namespace lalign {

struct CurvePoint {
  double k = 0.0;
  double accuracy = 0.0;
};

/// Trapezoidal area under an accuracy-vs-k curve. Throws TooFewPoints
/// (fewer than two points) or InvalidConfig (k not strictly increasing).
double auc_over_k(std::span<const CurvePoint> curve);

/// Regularized incomplete beta I_x(a, b), evaluated with the modified Lentz
/// continued fraction (relative tolerance 1e-15, converged results are
/// accurate to well under 1e-10 for the parameter ranges used here).
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof`
/// degrees of freedom: I_{dof/(dof+t^2)}(dof/2, 1/2).
double student_t_two_sided_p(double t, double dof);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
};

/// Paired t-test on d = a - b with n - 1 degrees of freedom.
/// Throws DimMismatch, TooFewPoints (n < 2) or ZeroVariance (all
/// differences equal, t undefined).
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace lalign
