#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "pushstab/domain.hpp"

namespace pushstab {

/// Finitely supported probability measure sum_i w_i delta_{x_i}.
///
/// Points are the columns of a d x n matrix. Weights are nonnegative and sum
/// to one within 1e-12; every point lies in the (closed) domain.
class DiscreteMeasure {
 public:
  DiscreteMeasure(Domain domain, Mat points, Vec weights);

  static DiscreteMeasure dirac(Domain domain, const Vec& x);
  static DiscreteMeasure uniform(Domain domain, Mat points);
  /// Rescales `weights` to unit total before validating.
  static DiscreteMeasure normalized(Domain domain, Mat points, Vec weights);

  const Domain& domain() const { return domain_; }
  int dim() const { return static_cast<int>(points_.rows()); }
  Index size() const { return points_.cols(); }
  const Mat& points() const { return points_; }
  const Vec& weights() const { return weights_; }
  auto point(Index i) const { return points_.col(i); }
  double weight(Index i) const { return weights_[i]; }

  /// Coincident atoms combined, zero-weight atoms dropped, atoms sorted
  /// lexicographically. Exact (bitwise) coincidence only.
  DiscreteMeasure merged() const;

  /// Same atoms, reinterpreted in another domain (validated).
  DiscreteMeasure with_domain(Domain domain) const;

 private:
  Domain domain_;
  Mat points_;
  Vec weights_;
};

/// Absolutely continuous measure represented by cell masses on a regular
/// grid over `support` (a box inside the domain). Cells whose center lies
/// outside the domain carry no mass. The density bound M_rho satisfies
/// mass(cell) <= M_rho * vol(cell) * (1 + 1e-9) for every cell.
class GridDensity {
 public:
  static GridDensity uniform(Domain domain, std::vector<int> resolution);
  static GridDensity uniform(Domain domain, Box support, std::vector<int> resolution);
  /// Cell masses proportional to density(center) * vol, then normalized.
  static GridDensity from_density(Domain domain, Box support, std::vector<int> resolution,
                                  const std::function<double(const Vec&)>& density);
  static GridDensity from_masses(Domain domain, Box support, std::vector<int> resolution, std::vector<double> masses,
                                 double density_bound);

  const Domain& domain() const { return domain_; }
  const Box& support() const { return support_; }
  const std::vector<int>& resolution() const { return resolution_; }
  const std::vector<double>& masses() const { return masses_; }
  double density_bound() const { return density_bound_; }
  int dim() const { return domain_.dim(); }
  Index cell_count() const { return static_cast<Index>(masses_.size()); }
  double cell_volume() const;
  Vec cell_widths() const;
  Vec cell_center(Index flat) const;

 private:
  GridDensity(Domain domain, Box support, std::vector<int> resolution, std::vector<double> masses,
              double density_bound);

  Domain domain_;
  Box support_;
  std::vector<int> resolution_;
  std::vector<double> masses_;  // flat, first axis fastest
  double density_bound_;
};

/// Interval [lo, hi] carrying `mass` spread uniformly.
struct Interval {
  double lo;
  double hi;
  double mass;
};

struct Atom {
  double location;
  double mass;
};

/// Piece of a piecewise-linear quantile function: on [u0, u1) the quantile
/// runs linearly from x0 to x1 (x0 == x1 for atoms).
struct QuantilePiece {
  double u0;
  double u1;
  double x0;
  double x1;
};

/// 1D probability measure: uniform pieces on disjoint intervals plus atoms.
class Measure1D {
 public:
  Measure1D(Domain domain, std::vector<Interval> intervals, std::vector<Atom> atoms);

  static Measure1D dirac(Domain domain, double x);
  static Measure1D uniform(Domain domain, double lo, double hi);
  /// Lebesgue measure (density one) on each interval plus the given atoms.
  static Measure1D lebesgue(Domain domain, const std::vector<std::pair<double, double>>& intervals,
                            std::vector<Atom> atoms = {});
  /// Atoms of a one-dimensional discrete measure.
  static Measure1D from_discrete(const DiscreteMeasure& m);

  const Domain& domain() const { return domain_; }
  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<QuantilePiece>& quantile_pieces() const { return pieces_; }

  double cdf(double x) const;
  Measure1D shifted(double a) const;

 private:
  Domain domain_;
  std::vector<Interval> intervals_;
  std::vector<Atom> atoms_;
  std::vector<QuantilePiece> pieces_;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Right-continuous generalized inverse CDF: inf{x : F(x) > u}; u = 1 maps
/// to the right end of the support.
double quantile(const Measure1D& m, double u);

/// (int_0^1 |F1^-1 - F2^-1|^r du)^(1/r), integrated exactly piece by piece;
/// r = kInfinity gives the essential sup of the quantile gap.
double wasserstein_1d(const Measure1D& m1, const Measure1D& m2, double r);

/// Cell-center discretization: one atom per positive-mass cell.
DiscreteMeasure discretize(const GridDensity& g);
/// Each interval split into `resolution` equal cells; atoms kept as is.
DiscreteMeasure discretize(const Measure1D& m, int resolution);

}  // namespace pushstab
