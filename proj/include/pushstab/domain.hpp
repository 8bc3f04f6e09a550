#pragma once

#include "pushstab/common.hpp"

namespace pushstab {

/// Axis-aligned box [lo, hi].
struct Box {
  Vec lo;
  Vec hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::Ref<const Vec>& x, double tol = 1e-9) const;
  double volume() const { return (hi - lo).prod(); }
};

/// Bounded ambient domain: a closed ball or a closed box.
class Domain {
 public:
  enum class Kind { kBall, kBox };

  static Domain ball(Vec center, double radius);
  static Domain ball(int dim, double radius) { return ball(Vec::Zero(dim), radius); }
  static Domain box(Vec lo, Vec hi);
  /// 1D interval [lo, hi].
  static Domain interval(double lo, double hi);

  Kind kind() const { return kind_; }
  int dim() const { return static_cast<int>(a_.size()); }

  const Vec& center() const { return a_; }  // ball only
  double radius() const { return radius_; }  // ball only

  Box bounding_box() const;
  /// Closed-set membership with absolute slack `tol`.
  bool contains(const Eigen::Ref<const Vec>& x, double tol = 1e-9) const;
  /// Largest distance from the origin to a point of the domain.
  double outer_radius() const;
  double volume() const;

  bool operator==(const Domain& other) const;
  bool operator!=(const Domain& other) const { return !(*this == other); }

  std::string describe() const;

 private:
  Domain(Kind kind, Vec a, Vec b, double radius) : kind_(kind), a_(std::move(a)), b_(std::move(b)), radius_(radius) {}

  Kind kind_;
  Vec a_;  // ball center or box lo
  Vec b_;  // box hi
  double radius_ = 0.0;
};

}  // namespace pushstab
