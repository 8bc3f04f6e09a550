#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <vector>

#include "pushstab/domain.hpp"

namespace pushstab {

/// x -> max_k <a_k, x> + b_k. Slopes are the columns of a d x K matrix.
class MaxAffineFunction {
 public:
  MaxAffineFunction(Mat slopes, Vec intercepts);

  static MaxAffineFunction affine(Vec slope, double intercept);
  /// |x| on the real line.
  static MaxAffineFunction abs();

  int dim() const { return static_cast<int>(slopes_.rows()); }
  Index pieces() const { return slopes_.cols(); }
  const Mat& slopes() const { return slopes_; }
  const Vec& intercepts() const { return intercepts_; }

  double operator()(const Eigen::Ref<const Vec>& x) const;
  Vec piece_values(const Eigen::Ref<const Vec>& x) const;
  /// max_k |a_k|
  double lipschitz() const;
  /// Absolute rounding slack for comparing piece values at x.
  double roundoff(const Eigen::Ref<const Vec>& x) const;

  /// 1D: sorted points where the envelope changes slope.
  std::vector<double> kinks() const;

 private:
  Mat slopes_;
  Vec intercepts_;
};

/// Vertices of a subdifferential: distinct slopes, lexicographic order.
struct SubdiffPolytope {
  Mat vertices;  // d x k

  double diameter() const;
  bool is_singleton(double tol = 1e-10) const { return diameter() < tol; }
};

/// Pieces within `tau` (plus rounding slack) of the max at x.
std::vector<Index> active_pieces(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double tau = 0.0);
SubdiffPolytope subdifferential(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double tau = 0.0);

/// Decides, per piece, whether it is maximal somewhere in the closed ball
/// B(x, eta): the distance from x to the polyhedron where the piece is
/// maximal is computed exactly by enumerating active sets of size <= d.
class BallActivity {
 public:
  explicit BallActivity(const MaxAffineFunction& f);

  std::vector<Index> active(const Eigen::Ref<const Vec>& x, double eta) const;
  /// diam of the subdifferential image of B(x, eta).
  double diameter(const Eigen::Ref<const Vec>& x, double eta) const;

 private:
  bool piece_reaches(Index i, const Eigen::Ref<const Vec>& x, double eta, const Vec& values) const;

  const MaxAffineFunction* f_;
  Mat slope_dist_;  // |a_i - a_j|
};

double diam_subdiff_ball(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double eta);

/// x -> max_{i=0..N} (2i/N - 1) L x + 2LR/(N(N+1)) i(N-i), on the real line.
MaxAffineFunction xi_function(int n, double lip, double radius);
/// Its singular points x_i = (2i/(N+1) - 1) R, i = 1..N.
std::vector<double> xi_singular_points(int n, double radius);

/// A max-affine function is already the envelope of its own tangent planes.
MaxAffineFunction lipschitz_extension(const MaxAffineFunction& f);
/// Envelope of the tangent planes f(x_k) + <g(x_k), . - x_k> at the sample
/// points (columns); agrees with a convex f at the samples.
MaxAffineFunction lipschitz_extension(const std::function<double(const Vec&)>& value,
                                      const std::function<Vec(const Vec&)>& subgradient, const Mat& samples);

/// `pieces` slopes uniform in B(0, lip_max); intercepts from tangent planes of
/// a paraboloid plus noise, resampled until every piece is maximal somewhere
/// in the domain's inscribed ball.
MaxAffineFunction random_max_affine(Rng& rng, const Domain& domain, int pieces, double lip_max);

/// Rows "a_1,...,a_d,b".
void write_max_affine_csv(std::ostream& os, const MaxAffineFunction& f);
MaxAffineFunction read_max_affine_csv(const std::filesystem::path& path);

}  // namespace pushstab
