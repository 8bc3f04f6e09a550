#pragma once

#include <functional>
#include <optional>
#include <string>

#include "pushstab/measures.hpp"
#include "pushstab/potential.hpp"
#include "pushstab/transport.hpp"

namespace pushstab {

/// Chooses one element of a subdifferential polytope at a singular atom.
/// The choice is always checked for hull membership.
class SelectionPolicy {
 public:
  enum class Kind { kMinNorm, kMaxFirstCoordinate, kFixedIndex, kUserVectors };

  static SelectionPolicy min_norm() { return SelectionPolicy(Kind::kMinNorm); }
  static SelectionPolicy max_first_coordinate() { return SelectionPolicy(Kind::kMaxFirstCoordinate); }
  /// k-th vertex in lexicographic order (clamped to the last one).
  static SelectionPolicy fixed_index(Index k);
  /// Column i of `vectors` is used for atom i.
  static SelectionPolicy user_vectors(Mat vectors);

  Kind kind() const { return kind_; }
  std::string describe() const;

  /// Throws std::domain_error when the chosen vector is not in the hull.
  Vec select(const SubdiffPolytope& s, Index atom) const;

 private:
  explicit SelectionPolicy(Kind kind) : kind_(kind) {}

  Kind kind_;
  Index index_ = 0;
  Mat vectors_;
};

struct PushforwardResult {
  DiscreteMeasure image;  // merged atoms
  Coupling coupling;      // input atoms -> image atoms
  Index singular_hits = 0;
};

/// (grad f)# rho, with the policy applied where f is not differentiable.
/// The image domain defaults to the ball B(0, Lip f).
PushforwardResult pushforward_convex(const MaxAffineFunction& f, const DiscreteMeasure& rho,
                                     const SelectionPolicy& policy = SelectionPolicy::min_norm(),
                                     std::optional<Domain> image_domain = std::nullopt);
PushforwardResult pushforward_convex(const MaxAffineFunction& f, const GridDensity& rho,
                                     const SelectionPolicy& policy = SelectionPolicy::min_norm(),
                                     std::optional<Domain> image_domain = std::nullopt);

/// (T_phi)# rho with x -> x - (grad xi_p)^(-1)(C x - g), g in d varphi(x).
PushforwardResult pushforward_tmap(const CConcavePotential& pot, const DiscreteMeasure& rho,
                                   const SelectionPolicy& policy = SelectionPolicy::min_norm());
PushforwardResult pushforward_tmap(const CConcavePotential& pot, const GridDensity& rho,
                                   const SelectionPolicy& policy = SelectionPolicy::min_norm());

/// Pushforward of the grid by the blend (1-t) phi0 + t phi1, whose
/// subdifferential is taken as the Minkowski combination (1-t) d phi0 + t d phi1.
PushforwardResult lot_interpolant(const MaxAffineFunction& phi0, const MaxAffineFunction& phi1, double t,
                                  const GridDensity& rho, const SelectionPolicy& policy = SelectionPolicy::min_norm(),
                                  std::optional<Domain> image_domain = std::nullopt);
PushforwardResult lot_interpolant(const MaxAffineFunction& phi0, const MaxAffineFunction& phi1, double t,
                                  const DiscreteMeasure& rho,
                                  const SelectionPolicy& policy = SelectionPolicy::min_norm(),
                                  std::optional<Domain> image_domain = std::nullopt);

struct BrenierPotential {
  MaxAffineFunction potential;  // x -> max_j <y_j, x> - v_j
  double margin = 0.0;          // min gap to the runner-up piece at non-split atoms
  bool refined = false;         // max-margin duals used (else raw solver duals)
  Index split_atoms = 0;        // source atoms sent to more than one target
};

/// Quadratic-cost Brenier potential from the exact discrete plan rho -> mu.
/// Target-side duals are re-chosen to maximize the margin by which each
/// unsplit source atom prefers its own target.
BrenierPotential potential_from_discrete_ot(const DiscreteMeasure& rho, const DiscreteMeasure& mu, double p = 2.0);

/// Masses of the cells {x : T_phi(x) = y_j} for a c-bar-transform potential.
/// 1D measures are handled exactly (cell boundaries by bisection; atoms of
/// rho routed through the policy).
Vec laguerre_masses(const CConcavePotential& pot, const Measure1D& rho,
                    const SelectionPolicy& policy = SelectionPolicy::min_norm());

struct LaguerreQuadrature {
  Vec masses;
  double straddle_mass = 0.0;  // mass of sub-cells whose corners disagree
};
/// Sub-cell midpoint quadrature (`sub` x ... x `sub` per grid cell).
LaguerreQuadrature laguerre_masses(const CConcavePotential& pot, const GridDensity& rho, int sub);

/// Index of the target attaining min_j |x - y_j|^p - psi_j (lowest on ties).
Index laguerre_cell(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x);

}  // namespace pushstab
