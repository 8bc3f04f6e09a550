#pragma once

#include "pushstab/common.hpp"

namespace pushstab {

/// Minimum-norm point of conv(columns of `points`) by Wolfe's algorithm.
Vec min_norm_point(const Mat& points);

/// Distance from g to conv(columns of `points`).
double hull_distance(const Mat& points, const Eigen::Ref<const Vec>& g);

/// Hull membership with absolute slack `tol`.
bool in_hull(const Mat& points, const Eigen::Ref<const Vec>& g, double tol = 1e-8);

/// Largest pairwise distance between columns (diameter of their hull).
double point_set_diameter(const Mat& points);

}  // namespace pushstab
