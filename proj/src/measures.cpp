#include "pushstab/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <tuple>

namespace pushstab {

namespace {

// Summing n weights in double accumulates up to ~n ulps of error.
double mass_tolerance(Index n) { return 1e-12 + 1e-15 * static_cast<double>(n); }

Vec grid_cell_widths(const Box& support, const std::vector<int>& resolution) {
  Vec w(support.dim());
  for (int k = 0; k < support.dim(); ++k)
    w[k] = (support.hi[k] - support.lo[k]) / resolution[static_cast<std::size_t>(k)];
  return w;
}

Vec grid_cell_center(const Box& support, const std::vector<int>& resolution, Index flat) {
  const Vec w = grid_cell_widths(support, resolution);
  Vec c(support.dim());
  for (int k = 0; k < support.dim(); ++k) {
    const int r = resolution[static_cast<std::size_t>(k)];
    const Index i = flat % r;
    flat /= r;
    c[k] = support.lo[k] + (static_cast<double>(i) + 0.5) * w[k];
  }
  return c;
}

bool lexicographic_less(const Mat& pts, Index a, Index b) {
  for (Index k = 0; k < pts.rows(); ++k) {
    if (pts(k, a) < pts(k, b)) return true;
    if (pts(k, a) > pts(k, b)) return false;
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscreteMeasure

DiscreteMeasure::DiscreteMeasure(Domain domain, Mat points, Vec weights)
    : domain_(std::move(domain)), points_(std::move(points)), weights_(std::move(weights)) {
  if (points_.cols() == 0) throw std::invalid_argument("DiscreteMeasure: no atoms");
  if (points_.rows() != domain_.dim()) throw std::invalid_argument("DiscreteMeasure: point dimension != domain dimension");
  if (weights_.size() != points_.cols()) throw std::invalid_argument("DiscreteMeasure: weight count != point count");
  if (!points_.allFinite()) throw std::invalid_argument("DiscreteMeasure: non-finite coordinate");
  if (!weights_.allFinite() || (weights_.array() < 0.0).any())
    throw std::invalid_argument("DiscreteMeasure: weights must be finite and nonnegative");
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > mass_tolerance(size())) {
    std::ostringstream os;
    os.precision(17);
    os << "DiscreteMeasure: weights sum to " << total << ", expected 1";
    throw std::invalid_argument(os.str());
  }
  for (Index i = 0; i < points_.cols(); ++i) {
    if (!domain_.contains(points_.col(i))) {
      std::ostringstream os;
      os.precision(17);
      os << "DiscreteMeasure: atom " << i << " at " << points_.col(i).transpose() << " lies outside "
         << domain_.describe();
      throw std::invalid_argument(os.str());
    }
  }
}

DiscreteMeasure DiscreteMeasure::dirac(Domain domain, const Vec& x) {
  Mat pts = x;
  return DiscreteMeasure(std::move(domain), std::move(pts), Vec::Ones(1));
}

DiscreteMeasure DiscreteMeasure::uniform(Domain domain, Mat points) {
  const Index n = points.cols();
  if (n == 0) throw std::invalid_argument("DiscreteMeasure::uniform: no atoms");
  Vec w = Vec::Constant(n, 1.0 / static_cast<double>(n));
  return DiscreteMeasure(std::move(domain), std::move(points), std::move(w));
}

DiscreteMeasure DiscreteMeasure::normalized(Domain domain, Mat points, Vec weights) {
  const double total = weights.sum();
  if (!(total > 0.0) || !std::isfinite(total)) throw std::invalid_argument("DiscreteMeasure::normalized: nonpositive total");
  weights /= total;
  return DiscreteMeasure(std::move(domain), std::move(points), std::move(weights));
}

DiscreteMeasure DiscreteMeasure::merged() const {
  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(size()));
  for (Index i = 0; i < size(); ++i)
    if (weights_[i] > 0.0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return lexicographic_less(points_, a, b); });

  std::vector<Index> reps;
  std::vector<double> mass;
  for (Index i : order) {
    if (!reps.empty() && points_.col(reps.back()) == points_.col(i)) {
      mass.back() += weights_[i];
    } else {
      reps.push_back(i);
      mass.push_back(weights_[i]);
    }
  }
  Mat pts(dim(), static_cast<Index>(reps.size()));
  Vec w(static_cast<Index>(reps.size()));
  for (std::size_t k = 0; k < reps.size(); ++k) {
    pts.col(static_cast<Index>(k)) = points_.col(reps[k]);
    w[static_cast<Index>(k)] = mass[k];
  }
  return DiscreteMeasure(domain_, std::move(pts), std::move(w));
}

DiscreteMeasure DiscreteMeasure::with_domain(Domain domain) const {
  return DiscreteMeasure(std::move(domain), points_, weights_);
}

// ---------------------------------------------------------------------------
// GridDensity

GridDensity::GridDensity(Domain domain, Box support, std::vector<int> resolution, std::vector<double> masses,
                         double density_bound)
    : domain_(std::move(domain)),
      support_(std::move(support)),
      resolution_(std::move(resolution)),
      masses_(std::move(masses)),
      density_bound_(density_bound) {
  const int d = domain_.dim();
  if (support_.dim() != d) throw std::invalid_argument("GridDensity: support dimension != domain dimension");
  if (!(support_.lo.array() < support_.hi.array()).all()) throw std::invalid_argument("GridDensity: empty support box");
  if (static_cast<int>(resolution_.size()) != d) throw std::invalid_argument("GridDensity: resolution needs one entry per axis");
  std::size_t count = 1;
  for (int r : resolution_) {
    if (r < 1) throw std::invalid_argument("GridDensity: resolution must be >= 1");
    count *= static_cast<std::size_t>(r);
  }
  if (masses_.size() != count) throw std::invalid_argument("GridDensity: mass count does not match resolution");
  if (!(density_bound_ > 0.0) || !std::isfinite(density_bound_))
    throw std::invalid_argument("GridDensity: density bound must be positive");

  const double vol = cell_volume();
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const double m = masses_[k];
    if (!std::isfinite(m) || m < 0.0) throw std::invalid_argument("GridDensity: masses must be finite and nonnegative");
    if (m > 0.0 && !domain_.contains(cell_center(static_cast<Index>(k))))
      throw std::invalid_argument("GridDensity: positive mass on a cell centered outside the domain");
    if (m > density_bound_ * vol * (1.0 + 1e-9)) throw std::invalid_argument("GridDensity: cell mass exceeds density bound");
    total += m;
  }
  if (std::abs(total - 1.0) > mass_tolerance(static_cast<Index>(count)))
    throw std::invalid_argument("GridDensity: cell masses must sum to 1");
}

GridDensity GridDensity::uniform(Domain domain, std::vector<int> resolution) {
  Box support = domain.bounding_box();
  return uniform(std::move(domain), std::move(support), std::move(resolution));
}

GridDensity GridDensity::uniform(Domain domain, Box support, std::vector<int> resolution) {
  return from_density(std::move(domain), std::move(support), std::move(resolution), [](const Vec&) { return 1.0; });
}

GridDensity GridDensity::from_density(Domain domain, Box support, std::vector<int> resolution,
                                      const std::function<double(const Vec&)>& density) {
  if (static_cast<int>(resolution.size()) != domain.dim() || support.dim() != domain.dim())
    throw std::invalid_argument("GridDensity::from_density: dimension mismatch");
  std::size_t count = 1;
  for (int r : resolution) {
    if (r < 1) throw std::invalid_argument("GridDensity: resolution must be >= 1");
    count *= static_cast<std::size_t>(r);
  }
  const double vol = grid_cell_widths(support, resolution).prod();
  std::vector<double> masses(count, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    const Vec c = grid_cell_center(support, resolution, static_cast<Index>(k));
    if (!domain.contains(c, 0.0)) continue;
    const double f = density(c);
    if (!std::isfinite(f) || f < 0.0) throw std::invalid_argument("GridDensity::from_density: density must be finite and >= 0");
    masses[k] = f * vol;
    total += masses[k];
  }
  if (!(total > 0.0)) throw std::invalid_argument("GridDensity::from_density: zero total mass");
  double max_density = 0.0;
  for (double& m : masses) {
    m /= total;
    max_density = std::max(max_density, m / vol);
  }
  return GridDensity(std::move(domain), std::move(support), std::move(resolution), std::move(masses), max_density);
}

GridDensity GridDensity::from_masses(Domain domain, Box support, std::vector<int> resolution, std::vector<double> masses,
                                     double density_bound) {
  return GridDensity(std::move(domain), std::move(support), std::move(resolution), std::move(masses), density_bound);
}

Vec GridDensity::cell_widths() const { return grid_cell_widths(support_, resolution_); }

double GridDensity::cell_volume() const { return cell_widths().prod(); }

Vec GridDensity::cell_center(Index flat) const { return grid_cell_center(support_, resolution_, flat); }

DiscreteMeasure discretize(const GridDensity& g) {
  std::vector<Index> cells;
  for (Index k = 0; k < g.cell_count(); ++k)
    if (g.masses()[static_cast<std::size_t>(k)] > 0.0) cells.push_back(k);
  Mat pts(g.dim(), static_cast<Index>(cells.size()));
  Vec w(static_cast<Index>(cells.size()));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    pts.col(static_cast<Index>(k)) = g.cell_center(cells[k]);
    w[static_cast<Index>(k)] = g.masses()[static_cast<std::size_t>(cells[k])];
  }
  return DiscreteMeasure(g.domain(), std::move(pts), std::move(w));
}

// ---------------------------------------------------------------------------
// Measure1D

Measure1D::Measure1D(Domain domain, std::vector<Interval> intervals, std::vector<Atom> atoms)
    : domain_(std::move(domain)) {
  if (domain_.dim() != 1) throw std::invalid_argument("Measure1D: domain must be one-dimensional");
  double total = 0.0;
  for (const Interval& iv : intervals) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi))
      throw std::invalid_argument("Measure1D: interval needs lo < hi");
    if (!std::isfinite(iv.mass) || iv.mass < 0.0) throw std::invalid_argument("Measure1D: negative interval mass");
    if (!domain_.contains(Vec::Constant(1, iv.lo)) || !domain_.contains(Vec::Constant(1, iv.hi)))
      throw std::invalid_argument("Measure1D: interval leaves the domain");
    total += iv.mass;
    if (iv.mass > 0.0) intervals_.push_back(iv);
  }
  for (const Atom& a : atoms) {
    if (!std::isfinite(a.location) || !std::isfinite(a.mass) || a.mass < 0.0)
      throw std::invalid_argument("Measure1D: invalid atom");
    if (!domain_.contains(Vec::Constant(1, a.location))) throw std::invalid_argument("Measure1D: atom outside the domain");
    total += a.mass;
  }
  if (std::abs(total - 1.0) > mass_tolerance(static_cast<Index>(intervals.size() + atoms.size())))
    throw std::invalid_argument("Measure1D: total mass must be 1");

  std::sort(intervals_.begin(), intervals_.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  for (std::size_t k = 1; k < intervals_.size(); ++k)
    if (intervals_[k].lo < intervals_[k - 1].hi) throw std::invalid_argument("Measure1D: intervals overlap");

  // Coincident atoms are merged.
  std::vector<Atom> sorted_atoms;
  for (const Atom& a : atoms)
    if (a.mass > 0.0) sorted_atoms.push_back(a);
  std::sort(sorted_atoms.begin(), sorted_atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const Atom& a : sorted_atoms) {
    if (!atoms_.empty() && atoms_.back().location == a.location)
      atoms_.back().mass += a.mass;
    else
      atoms_.push_back(a);
  }

  // Continuous parts are split at interior atoms; each item is
  // (start, kind, end, mass) with kind 0 = atom so that an atom sitting at
  // the left end of an interval precedes it.
  std::vector<std::tuple<double, int, double, double>> items;
  for (const Atom& a : atoms_) items.emplace_back(a.location, 0, a.location, a.mass);
  for (const Interval& iv : intervals_) {
    const double density = iv.mass / (iv.hi - iv.lo);
    double start = iv.lo;
    for (const Atom& a : atoms_) {
      if (a.location <= start || a.location >= iv.hi) continue;
      items.emplace_back(start, 1, a.location, density * (a.location - start));
      start = a.location;
    }
    items.emplace_back(start, 1, iv.hi, density * (iv.hi - start));
  }
  std::sort(items.begin(), items.end());

  double u = 0.0;
  for (const auto& [x0, kind, x1, mass] : items) {
    if (!(mass > 0.0)) continue;
    pieces_.push_back({u, u + mass, x0, x1});
    u += mass;
  }
  pieces_.back().u1 = 1.0;
  for (std::size_t k = 1; k < pieces_.size(); ++k) pieces_[k].u0 = pieces_[k - 1].u1;
}

Measure1D Measure1D::dirac(Domain domain, double x) { return Measure1D(std::move(domain), {}, {{x, 1.0}}); }

Measure1D Measure1D::uniform(Domain domain, double lo, double hi) {
  return Measure1D(std::move(domain), {{lo, hi, 1.0}}, {});
}

Measure1D Measure1D::lebesgue(Domain domain, const std::vector<std::pair<double, double>>& intervals,
                              std::vector<Atom> atoms) {
  std::vector<Interval> ivs;
  for (const auto& [lo, hi] : intervals) ivs.push_back({lo, hi, hi - lo});
  return Measure1D(std::move(domain), std::move(ivs), std::move(atoms));
}

Measure1D Measure1D::from_discrete(const DiscreteMeasure& m) {
  if (m.dim() != 1) throw std::invalid_argument("Measure1D::from_discrete: measure is not one-dimensional");
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) atoms.push_back({m.points()(0, i), m.weight(i)});
  return Measure1D(m.domain(), {}, std::move(atoms));
}

double Measure1D::cdf(double x) const {
  double f = 0.0;
  for (const Atom& a : atoms_)
    if (a.location <= x) f += a.mass;
  for (const Interval& iv : intervals_) {
    if (x >= iv.hi)
      f += iv.mass;
    else if (x > iv.lo)
      f += iv.mass * (x - iv.lo) / (iv.hi - iv.lo);
  }
  return std::min(f, 1.0);
}

Measure1D Measure1D::shifted(double a) const {
  std::vector<Interval> ivs = intervals_;
  std::vector<Atom> ats = atoms_;
  for (Interval& iv : ivs) {
    iv.lo += a;
    iv.hi += a;
  }
  for (Atom& at : ats) at.location += a;
  return Measure1D(domain_, std::move(ivs), std::move(ats));
}

double quantile(const Measure1D& m, double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::invalid_argument("quantile: u must lie in [0, 1]");
  const auto& pieces = m.quantile_pieces();
  for (const QuantilePiece& q : pieces) {
    if (u < q.u1) {
      if (q.x0 == q.x1) return q.x0;
      return q.x0 + (q.x1 - q.x0) * (u - q.u0) / (q.u1 - q.u0);
    }
  }
  return pieces.back().x1;
}

namespace {

// int_0^h |a + (b - a) t / h|^r dt for a, b of the same sign.
double power_integral_same_sign(double a, double b, double h, double r) {
  a = std::abs(a);
  b = std::abs(b);
  const double hi = std::max(a, b);
  if (hi == 0.0) return 0.0;
  if (std::abs(b - a) <= 1e-3 * hi) {
    // Five-point Gauss-Legendre; the integrand is analytic and nearly flat here.
    static constexpr double kNodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                         0.9061798459386640};
    static constexpr double kWeights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                           0.2369268850561891, 0.2369268850561891};
    double s = 0.0;
    for (int k = 0; k < 5; ++k) {
      const double t = 0.5 * (kNodes[k] + 1.0);
      s += kWeights[k] * std::pow(a + (b - a) * t, r);
    }
    return 0.5 * h * s;
  }
  return h * (std::pow(b, r + 1.0) - std::pow(a, r + 1.0)) / ((r + 1.0) * (b - a));
}

// int over a u-interval of length h where the quantile gap runs linearly d0 -> d1.
double power_integral(double d0, double d1, double h, double r) {
  if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
    const double t = d0 / (d0 - d1);
    return power_integral_same_sign(d0, 0.0, h * t, r) + power_integral_same_sign(0.0, d1, h * (1.0 - t), r);
  }
  return power_integral_same_sign(d0, d1, h, r);
}

double piece_value(const QuantilePiece& q, double u) {
  if (q.x0 == q.x1) return q.x0;
  return q.x0 + (q.x1 - q.x0) * (u - q.u0) / (q.u1 - q.u0);
}

}  // namespace

constexpr double kBreakTol = 1e-12;

double wasserstein_1d(const Measure1D& m1, const Measure1D& m2, double r) {
  if (!(r > 1.0)) throw std::invalid_argument("wasserstein_1d: order r must exceed 1");
  if (m1.domain() != m2.domain())
    throw std::invalid_argument("wasserstein_1d: measures live on different domains (" + m1.domain().describe() +
                                " vs " + m2.domain().describe() + ")");
  const auto& p1 = m1.quantile_pieces();
  const auto& p2 = m2.quantile_pieces();
  const bool sup = std::isinf(r);
  std::size_t i = 0;
  std::size_t j = 0;
  double pos = 0.0;
  double acc = 0.0;
  while (i < p1.size() && j < p2.size()) {
    const double end = std::min(p1[i].u1, p2[j].u1);
    if (end > pos) {
      const double d0 = piece_value(p1[i], pos) - piece_value(p2[j], pos);
      const double d1 = piece_value(p1[i], end) - piece_value(p2[j], end);
      if (sup)
        acc = std::max({acc, std::abs(d0), std::abs(d1)});
      else
        acc += power_integral(d0, d1, end - pos, r);
      pos = end;
    }
    // Breakpoints that differ only by rounding in the cumulative masses are
    // one breakpoint; otherwise a sliver would pair values across a jump.
    if (p1[i].u1 <= end + kBreakTol) ++i;
    if (p2[j].u1 <= end + kBreakTol) ++j;
  }
  return sup ? acc : std::pow(acc, 1.0 / r);
}

DiscreteMeasure discretize(const Measure1D& m, int resolution) {
  if (resolution < 1) throw std::invalid_argument("discretize: resolution must be >= 1");
  std::vector<double> xs;
  std::vector<double> ws;
  for (const Interval& iv : m.intervals()) {
    const double h = (iv.hi - iv.lo) / resolution;
    for (int k = 0; k < resolution; ++k) {
      xs.push_back(iv.lo + (k + 0.5) * h);
      ws.push_back(iv.mass / resolution);
    }
  }
  for (const Atom& a : m.atoms()) {
    xs.push_back(a.location);
    ws.push_back(a.mass);
  }
  Mat pts(1, static_cast<Index>(xs.size()));
  Vec w(static_cast<Index>(ws.size()));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    pts(0, static_cast<Index>(k)) = xs[k];
    w[static_cast<Index>(k)] = ws[k];
  }
  return DiscreteMeasure(m.domain(), std::move(pts), std::move(w));
}

}  // namespace pushstab
