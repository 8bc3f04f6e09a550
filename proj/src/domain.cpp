#include "pushstab/domain.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace pushstab {

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Vec Rng::in_ball(const Vec& center, double radius) {
  const Index d = center.size();
  Vec x(d);
  for (;;) {
    for (Index k = 0; k < d; ++k) x[k] = uniform(-1.0, 1.0);
    if (x.squaredNorm() <= 1.0) break;
  }
  return center + radius * x;
}

double unit_ball_volume(int d) {
  return std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0);
}

bool Box::contains(const Eigen::Ref<const Vec>& x, double tol) const {
  if (x.size() != lo.size()) return false;
  return ((x - lo).array() >= -tol).all() && ((hi - x).array() >= -tol).all();
}

Domain Domain::ball(Vec center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("Domain::ball: radius must be positive");
  if (center.size() == 0) throw std::invalid_argument("Domain::ball: empty center");
  return Domain(Kind::kBall, std::move(center), Vec(), radius);
}

Domain Domain::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size() || lo.size() == 0) throw std::invalid_argument("Domain::box: lo/hi dimension mismatch");
  if (!(lo.array() < hi.array()).all()) throw std::invalid_argument("Domain::box: lo must be < hi componentwise");
  return Domain(Kind::kBox, std::move(lo), std::move(hi), 0.0);
}

Domain Domain::interval(double lo, double hi) {
  return box(Vec::Constant(1, lo), Vec::Constant(1, hi));
}

Box Domain::bounding_box() const {
  if (kind_ == Kind::kBox) return {a_, b_};
  return {a_.array() - radius_, a_.array() + radius_};
}

bool Domain::contains(const Eigen::Ref<const Vec>& x, double tol) const {
  if (x.size() != a_.size() || !x.allFinite()) return false;
  if (kind_ == Kind::kBox) return Box{a_, b_}.contains(x, tol);
  return (x - a_).norm() <= radius_ + tol;
}

double Domain::outer_radius() const {
  if (kind_ == Kind::kBall) return a_.norm() + radius_;
  return a_.cwiseAbs().cwiseMax(b_.cwiseAbs()).norm();
}

double Domain::volume() const {
  if (kind_ == Kind::kBox) return (b_ - a_).prod();
  return unit_ball_volume(dim()) * std::pow(radius_, dim());
}

bool Domain::operator==(const Domain& other) const {
  if (kind_ != other.kind_ || dim() != other.dim()) return false;
  if (kind_ == Kind::kBall) return a_ == other.a_ && radius_ == other.radius_;
  return a_ == other.a_ && b_ == other.b_;
}

std::string Domain::describe() const {
  std::ostringstream os;
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ",", ",", "", "", "[", "]");
  if (kind_ == Kind::kBall) {
    os << "ball(center=" << a_.transpose().format(fmt) << ", radius=" << radius_ << ")";
  } else {
    os << "box(lo=" << a_.transpose().format(fmt) << ", hi=" << b_.transpose().format(fmt) << ")";
  }
  return os.str();
}

}  // namespace pushstab
