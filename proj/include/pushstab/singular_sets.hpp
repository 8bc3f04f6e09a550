#pragma once

#include <iosfwd>
#include <string>

#include "pushstab/max_affine.hpp"

namespace pushstab {

/// Greedy 8*eta covering of the grid-detected near-singularity set
/// {x in B(0,R) : diam(df(B(x, eta))) >= alpha}.
struct SingularSetReport {
  double eta = 0.0;
  double alpha = 0.0;
  double radius = 0.0;
  Mat centers;               // d x count, each a detected point
  Index count = 0;           // covering number upper estimate
  Index detected = 0;        // grid points found in the set
  double theorem_bound = 0;  // 48 d^2 (R + 4 eta)^(d-1) Lip / (alpha eta^(d-1))
  /// eta^(d-1) times a greedy eta-cover count of the points whose own
  /// subdifferential has diameter >= alpha (resolution eta/4). An estimate,
  /// not a Hausdorff measure.
  double hausdorff_estimate = 0.0;
};

SingularSetReport covering_number_sigma(const MaxAffineFunction& f, double eta, double alpha, double radius);

/// 48 d^2 (R + 4 eta)^(d-1)
double covering_constant(int d, double radius, double eta);

struct IntegralEstimate {
  double estimate = 0.0;  // int_{B(0,R)} diam(df(B(x, eta)))^q dx
  double bound = 0.0;     // c_{d,q,R,eta} Lip^q eta
  double constant = 0.0;  // c_{d,q,R,eta}
  std::string method;     // "exact-1d" or "midpoint h=<step>"
};

/// 48 d^2 beta_d 2^(3d+q-1) q/(q-1) (R + 4 eta)^(d-1)
double integral_constant(int d, double q, double radius, double eta);

/// In 1D the integrand is piecewise constant with breaks at kinks +- eta and
/// is integrated exactly; in higher dimension a midpoint rule of step
/// min(eta/8, R/512) over the cubic grid restricted to the ball.
IntegralEstimate integral_diam_estimate(const MaxAffineFunction& f, double eta, double q, double radius);

struct LemmaCheck {
  double lhs = 0.0;  // diam(df(B(x, eta)))
  double rhs = 0.0;  // 12 / (beta_d eta^d) * int_{B(x, 4 eta)} |grad f|
};

LemmaCheck verify_lemma_diam_l1(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double eta);

/// Centers as "x1,...,xd" rows followed by a "# summary" comment line.
void write_singular_report_csv(std::ostream& os, const SingularSetReport& report);

}  // namespace pushstab
