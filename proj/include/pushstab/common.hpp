#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace pushstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;  // point sets are stored column-wise (d x n)
using Index = Eigen::Index;

/// Raised when a point handed to a map is a singular point and no selection
/// policy was supplied.
class NonDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a transport image leaves its closed domain.
class DomainEscapeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised by audits when a bound is violated or evaluates to NaN.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Seeded generator. std::mt19937_64 has a standard-mandated output sequence;
// the double conversion below is pinned here instead of relying on
// std::uniform_real_distribution, whose algorithm is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::uint64_t next() { return engine_(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  /// Standard normal via Box-Muller (pinned for reproducibility).
  double normal();

  /// Uniform point in the ball B(center, radius).
  Vec in_ball(const Vec& center, double radius);

 private:
  std::mt19937_64 engine_;
};

/// Volume of the unit ball of R^d.
double unit_ball_volume(int d);

}  // namespace pushstab
