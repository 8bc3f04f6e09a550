#include "pushstab/hull.hpp"

#include <algorithm>
#include <vector>

namespace pushstab {

namespace {

// Affine minimizer of |sum mu_k p_k| subject to sum mu_k = 1 over the
// corral S; solved through the bordered Gram system.
Vec affine_minimizer(const Mat& points, const std::vector<Index>& corral) {
  const auto k = static_cast<Index>(corral.size());
  Mat sys = Mat::Zero(k + 1, k + 1);
  for (Index a = 0; a < k; ++a) {
    for (Index b = 0; b < k; ++b) sys(a, b) = points.col(corral[a]).dot(points.col(corral[b]));
    sys(a, k) = 1.0;
    sys(k, a) = 1.0;
  }
  Vec rhs = Vec::Zero(k + 1);
  rhs[k] = 1.0;
  const Vec sol = sys.completeOrthogonalDecomposition().solve(rhs);
  return sol.head(k);
}

}  // namespace

Vec min_norm_point(const Mat& points) {
  if (points.cols() == 0) throw std::invalid_argument("min_norm_point: empty point set");
  const Index n = points.cols();
  if (n == 1) return points.col(0);

  const double scale = std::max(points.colwise().squaredNorm().maxCoeff(), 1e-300);
  const double tol = 1e-13 * scale;

  Index start = 0;
  points.colwise().squaredNorm().minCoeff(&start);
  std::vector<Index> corral{start};
  std::vector<double> lambda{1.0};
  Vec x = points.col(start);

  for (int major = 0; major < 10 * static_cast<int>(n) + 50; ++major) {
    Index j = 0;
    (x.transpose() * points).minCoeff(&j);
    if (x.squaredNorm() - x.dot(points.col(j)) <= tol) break;
    if (std::find(corral.begin(), corral.end(), j) != corral.end()) break;  // no progress possible
    corral.push_back(j);
    lambda.push_back(0.0);

    for (int minor = 0; minor < static_cast<int>(n) + 5; ++minor) {
      const Vec mu = affine_minimizer(points, corral);
      if ((mu.array() > 1e-15).all()) {
        for (std::size_t a = 0; a < corral.size(); ++a) lambda[a] = mu[static_cast<Index>(a)];
        break;
      }
      double theta = 1.0;
      for (std::size_t a = 0; a < corral.size(); ++a) {
        const double m = mu[static_cast<Index>(a)];
        if (m <= 1e-15) theta = std::min(theta, lambda[a] / (lambda[a] - m));
      }
      std::vector<Index> next_c;
      std::vector<double> next_l;
      for (std::size_t a = 0; a < corral.size(); ++a) {
        const double l = (1.0 - theta) * lambda[a] + theta * mu[static_cast<Index>(a)];
        if (l > 1e-15) {
          next_c.push_back(corral[a]);
          next_l.push_back(l);
        }
      }
      if (next_c.empty()) {  // numerical corner: keep the newest point
        next_c.push_back(corral.back());
        next_l.push_back(1.0);
      }
      corral = std::move(next_c);
      lambda = std::move(next_l);
      double sum = 0.0;
      for (double l : lambda) sum += l;
      for (double& l : lambda) l /= sum;
    }
    x.setZero();
    for (std::size_t a = 0; a < corral.size(); ++a) x += lambda[a] * points.col(corral[a]);
  }
  return x;
}

double hull_distance(const Mat& points, const Eigen::Ref<const Vec>& g) {
  return min_norm_point(points.colwise() - g).norm();
}

bool in_hull(const Mat& points, const Eigen::Ref<const Vec>& g, double tol) {
  if (g.size() != points.rows()) return false;
  return hull_distance(points, g) <= tol;
}

double point_set_diameter(const Mat& points) {
  double d = 0.0;
  for (Index a = 0; a < points.cols(); ++a)
    for (Index b = a + 1; b < points.cols(); ++b) d = std::max(d, (points.col(a) - points.col(b)).norm());
  return d;
}

}  // namespace pushstab
