#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "pushstab/domain.hpp"
#include "pushstab/max_affine.hpp"
#include "pushstab/pcost.hpp"

namespace pushstab {

/// Convex side of a potential: varphi(x) = C |x|^2 / 2 - phi(x), C = p(p-1)R^(p-2).
/// Either a max-affine function (exact oracles) or a closed form giving the
/// value and the vertices of the subdifferential.
struct ConvexSide {
  std::function<double(const Vec&)> value;
  std::function<Mat(const Vec&)> subdifferential;  // vertex gradients, d x k
  double lipschitz;                                 // p^2 R^(p-1)
  std::shared_ptr<const MaxAffineFunction> polyhedral;
};

/// Potential phi on a domain, represented through its convex side. Every
/// needed object (grad phi, T_phi, the c-subdifferential) factors through
/// the subdifferential of varphi.
class CConcavePotential {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using SubdiffFn = std::function<Mat(const Vec&)>;

  /// phi = C |x|^2 / 2 - varphi with varphi max-affine.
  static CConcavePotential from_convex(PCost cost, Domain domain, MaxAffineFunction varphi, bool c_concave,
                                       std::string label = "max-affine");
  /// Closed form: phi and the subdifferential vertices of varphi.
  static CConcavePotential closed_form(PCost cost, Domain domain, ValueFn phi, SubdiffFn convex_subdiff,
                                       bool c_concave, std::string label);

  /// phi = 0.
  static CConcavePotential zero(PCost cost, Domain domain);
  /// phi(x) = <a, x>.
  static CConcavePotential linear(PCost cost, Domain domain, Vec a);
  /// phi(x) = (1 - |x|)^p on [-1, 1].
  static CConcavePotential tightness(double p);
  /// phi(x) = min_j |x - y_j|^p - psi_j; max-affine convex side when p = 2.
  static CConcavePotential c_bar_transform(PCost cost, Domain domain, Mat targets, Vec psi);

  const PCost& cost() const { return cost_; }
  const Domain& domain() const { return domain_; }
  const std::string& label() const { return label_; }
  /// Whether phi = (phi^c)^cbar holds by construction.
  bool c_concave() const { return c_concave_; }

  double operator()(const Eigen::Ref<const Vec>& x) const;
  /// varphi oracle (value, subdifferential vertices, Lipschitz constant).
  const ConvexSide& convex_side() const { return convex_; }
  /// Vertices of d varphi(x), distinct, lexicographic.
  SubdiffPolytope convex_subdifferential(const Eigen::Ref<const Vec>& x) const;

  /// Targets/psi when built by c_bar_transform.
  const Mat* targets() const { return targets_ ? &*targets_ : nullptr; }
  const Vec* psi() const { return psi_ ? &*psi_ : nullptr; }

 private:
  CConcavePotential(PCost cost, Domain domain, ValueFn phi, ConvexSide convex, bool c_concave, std::string label)
      : cost_(cost), domain_(std::move(domain)), phi_(std::move(phi)), convex_(std::move(convex)),
        c_concave_(c_concave), label_(std::move(label)) {}

  PCost cost_;
  Domain domain_;
  ValueFn phi_;
  ConvexSide convex_;
  bool c_concave_;
  std::string label_;
  std::optional<Mat> targets_;
  std::optional<Vec> psi_;
};

/// Inverse conversion: phi = C |x|^2 / 2 - varphi.
CConcavePotential phi_from_convex(PCost cost, Domain domain, MaxAffineFunction varphi);

/// grad phi(x) = C x - g for the selected g in d varphi(x).
Vec grad_phi(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& g);

/// x - (grad xi_p)^(-1)(C x - g): image of x paired with g in d varphi(x).
Vec t_phi_with(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& g);

/// T_phi(x). Throws NonDifferentiableError when d varphi(x) has diameter
/// >= 1e-10 and DomainEscapeError when the image leaves the closed domain by
/// more than 1e-8.
Vec t_phi(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x);

struct PartialCDiam {
  double bound = 0.0;       // 8p (1 + R^((p-2)/(p-1))) (eta^(1/(p-1)) + D^(1/(p-1)))
  double convex_diam = 0.0;  // D = diam(d varphi(B(x, eta)))
  bool convex_diam_exact = false;
  /// diam of the c-subdifferential image of B(x, eta) intersected with the
  /// domain, when computable exactly (d = 1, or p = 2 with polyhedral varphi).
  std::optional<double> exact;
};

PartialCDiam diam_partial_c(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, double eta);

/// Sampled checks of the potential invariants: Lipschitz constant <= pR^(p-1)
/// and midpoint convexity of varphi, over `samples` random pairs in the domain.
struct PotentialAudit {
  double max_lipschitz_ratio = 0.0;  // observed slope / (p R^(p-1))
  double min_midpoint_gap = 0.0;     // min (varphi(x)+varphi(y))/2 - varphi((x+y)/2)
  bool ok = false;
};
PotentialAudit audit_potential(const CConcavePotential& pot, Rng& rng, int samples = 2000);

}  // namespace pushstab
