#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <vector>

#include "pushstab/common.hpp"
#include "pushstab/measures.hpp"

namespace testing {

using pushstab::Domain;
using pushstab::DiscreteMeasure;
using pushstab::Index;
using pushstab::Mat;
using pushstab::Rng;
using pushstab::Vec;

inline Mat random_points(Rng& rng, int d, Index n, double radius = 1.0) {
  Mat pts(d, n);
  for (Index i = 0; i < n; ++i) pts.col(i) = rng.in_ball(Vec::Zero(d), radius);
  return pts;
}

inline DiscreteMeasure random_uniform(Rng& rng, const Domain& dom, Index n) {
  return DiscreteMeasure::uniform(dom, random_points(rng, dom.dim(), n, 0.999 * dom.outer_radius()));
}

inline DiscreteMeasure random_weighted(Rng& rng, const Domain& dom, Index n) {
  Vec w(n);
  for (Index i = 0; i < n; ++i) w[i] = rng.uniform(0.1, 1.0);
  return DiscreteMeasure::normalized(dom, random_points(rng, dom.dim(), n, 0.999 * dom.outer_radius()), w);
}

// Minimum over all n! permutation couplings of (1/n) sum |x_i - y_s(i)|^p.
inline double permutation_oracle(const Mat& x, const Mat& y, double p) {
  const Index n = x.cols();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = INFINITY;
  do {
    double c = 0.0;
    for (Index i = 0; i < n; ++i) c += std::pow((x.col(i) - y.col(perm[static_cast<std::size_t>(i)])).norm(), p);
    best = std::min(best, c / static_cast<double>(n));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Minimum over permutations of the largest matched distance.
inline double bottleneck_oracle(const Mat& x, const Mat& y) {
  const Index n = x.cols();
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = INFINITY;
  do {
    double c = 0.0;
    for (Index i = 0; i < n; ++i) c = std::max(c, (x.col(i) - y.col(perm[static_cast<std::size_t>(i)])).norm());
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pushstab_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
