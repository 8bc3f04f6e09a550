#include "pushstab/singular_sets.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "parallel.hpp"
#include "pushstab/csv.hpp"

namespace pushstab {

namespace {

// Lattice points h * k (k integer) inside the closed ball B(0, R), first
// coordinate fastest.
Mat ball_lattice(int d, double radius, double h) {
  const auto k_max = static_cast<Index>(std::floor(radius / h + 1e-9));
  const Index side = 2 * k_max + 1;
  Index total = 1;
  for (int k = 0; k < d; ++k) total *= side;
  std::vector<double> coords;
  Vec x(d);
  for (Index flat = 0; flat < total; ++flat) {
    Index rest = flat;
    for (int k = 0; k < d; ++k) {
      x[k] = h * static_cast<double>(rest % side - k_max);
      rest /= side;
    }
    if (x.norm() <= radius * (1.0 + 1e-12)) coords.insert(coords.end(), x.data(), x.data() + d);
  }
  return Eigen::Map<Mat>(coords.data(), d, static_cast<Index>(coords.size()) / d);
}

// Greedy cover: scan points in order, open a new ball of radius `r` at any
// point not yet covered.
std::vector<Index> greedy_cover(const Mat& pts, double r) {
  std::vector<Index> centers;
  for (Index i = 0; i < pts.cols(); ++i) {
    bool covered = false;
    for (Index c : centers)
      if ((pts.col(i) - pts.col(c)).norm() <= r) {
        covered = true;
        break;
      }
    if (!covered) centers.push_back(i);
  }
  return centers;
}

Mat select_columns(const Mat& pts, const std::vector<Index>& idx) {
  Mat out(pts.rows(), static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Index>(k)) = pts.col(idx[k]);
  return out;
}

// Breakpoints of a piecewise-constant 1D integrand on [lo, hi].
std::vector<double> breakpoints(const std::vector<double>& kinks, double offset, double lo, double hi) {
  std::vector<double> pts{lo, hi};
  for (double k : kinks)
    for (double s : {k - offset, k + offset})
      if (s > lo && s < hi) pts.push_back(s);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

}  // namespace

double covering_constant(int d, double radius, double eta) {
  return 48.0 * d * d * std::pow(radius + 4.0 * eta, d - 1);
}

SingularSetReport covering_number_sigma(const MaxAffineFunction& f, double eta, double alpha, double radius) {
  if (!(eta > 0.0) || !(alpha > 0.0) || !(radius > 0.0))
    throw std::invalid_argument("covering_number_sigma: eta, alpha, R must be > 0");
  const int d = f.dim();
  const double lip = f.lipschitz();
  SingularSetReport rep;
  rep.eta = eta;
  rep.alpha = alpha;
  rep.radius = radius;
  rep.theorem_bound = covering_constant(d, radius, eta) * lip / (alpha * std::pow(eta, d - 1));
  rep.centers = Mat(d, 0);
  if (alpha > 2.0 * lip) return rep;  // diameters never exceed 2 Lip

  const Mat grid = ball_lattice(d, radius, eta / 4.0);
  const BallActivity activity(f);
  const double cut = alpha - 1e-9 * std::max(1.0, alpha);
  std::vector<char> hit(static_cast<std::size_t>(grid.cols()));
  std::vector<char> sharp(static_cast<std::size_t>(grid.cols()));
  const double fine = 0.5 * (eta / 4.0) * std::sqrt(static_cast<double>(d));
  detail::parallel_for(static_cast<std::size_t>(grid.cols()), [&](std::size_t i) {
    const auto x = grid.col(static_cast<Index>(i));
    hit[i] = activity.diameter(x, eta) >= cut;
    sharp[i] = hit[i] && activity.diameter(x, fine) >= cut;
  });
  std::vector<Index> detected;
  std::vector<Index> near_sigma;
  for (std::size_t i = 0; i < hit.size(); ++i) {
    if (hit[i]) detected.push_back(static_cast<Index>(i));
    if (sharp[i]) near_sigma.push_back(static_cast<Index>(i));
  }
  const Mat found = select_columns(grid, detected);
  rep.detected = found.cols();
  rep.centers = select_columns(found, greedy_cover(found, 8.0 * eta));
  rep.count = rep.centers.cols();
  const Mat sharp_pts = select_columns(grid, near_sigma);
  rep.hausdorff_estimate =
      std::pow(eta, d - 1) * static_cast<double>(greedy_cover(sharp_pts, eta).size());
  return rep;
}

double integral_constant(int d, double q, double radius, double eta) {
  return 48.0 * d * d * unit_ball_volume(d) * std::pow(2.0, 3.0 * d + q - 1.0) * (q / (q - 1.0)) *
         std::pow(radius + 4.0 * eta, d - 1);
}

IntegralEstimate integral_diam_estimate(const MaxAffineFunction& f, double eta, double q, double radius) {
  if (!(q > 1.0)) throw std::invalid_argument("integral_diam_estimate: q must be > 1");
  if (!(eta > 0.0) || !(radius > 0.0)) throw std::invalid_argument("integral_diam_estimate: eta, R must be > 0");
  const int d = f.dim();
  IntegralEstimate out;
  out.constant = integral_constant(d, q, radius, eta);
  out.bound = out.constant * std::pow(f.lipschitz(), q) * eta;
  const BallActivity activity(f);

  if (d == 1) {
    const auto pts = breakpoints(f.kinks(), eta, -radius, radius);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      const Vec mid = Vec::Constant(1, 0.5 * (pts[k] + pts[k + 1]));
      sum += (pts[k + 1] - pts[k]) * std::pow(activity.diameter(mid, eta), q);
    }
    out.estimate = sum;
    out.method = "exact-1d";
    return out;
  }

  const double h0 = std::min(eta / 8.0, radius / 512.0);
  const auto n = static_cast<Index>(std::ceil(2.0 * radius / h0 - 1e-9));
  const double h = 2.0 * radius / static_cast<double>(n);
  Index rows = 1;
  for (int k = 1; k < d; ++k) rows *= n;
  // One slot per line along the first axis, reduced in order.
  std::vector<double> partial(static_cast<std::size_t>(rows), 0.0);
  detail::parallel_for(static_cast<std::size_t>(rows), [&](std::size_t r) {
    Vec x(d);
    Index rest = static_cast<Index>(r);
    for (int k = 1; k < d; ++k) {
      x[k] = -radius + (static_cast<double>(rest % n) + 0.5) * h;
      rest /= n;
    }
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      x[0] = -radius + (static_cast<double>(i) + 0.5) * h;
      if (x.norm() > radius) continue;
      const double diam = activity.diameter(x, eta);
      if (diam > 0.0) acc += std::pow(diam, q);
    }
    partial[r] = acc;
  });
  double sum = 0.0;
  for (double v : partial) sum += v;
  out.estimate = sum * std::pow(h, d);
  out.method = "midpoint h=" + format_double(h);
  return out;
}

LemmaCheck verify_lemma_diam_l1(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("verify_lemma_diam_l1: eta must be > 0");
  const int d = f.dim();
  LemmaCheck out;
  out.lhs = diam_subdiff_ball(f, x, eta);
  const double r = 4.0 * eta;
  double l1 = 0.0;
  auto grad_norm = [&](const Vec& y) {
    Index k = 0;
    f.piece_values(y).maxCoeff(&k);
    return f.slopes().col(k).norm();
  };
  if (d == 1) {
    const auto pts = breakpoints(f.kinks(), 0.0, x[0] - r, x[0] + r);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k)
      l1 += (pts[k + 1] - pts[k]) * grad_norm(Vec::Constant(1, 0.5 * (pts[k] + pts[k + 1])));
  } else {
    const Index n = d == 2 ? 400 : 60;
    const double h = 2.0 * r / static_cast<double>(n);
    Index total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    Vec y(d);
    for (Index flat = 0; flat < total; ++flat) {
      Index rest = flat;
      for (int k = 0; k < d; ++k) {
        y[k] = x[k] - r + (static_cast<double>(rest % n) + 0.5) * h;
        rest /= n;
      }
      if ((y - x).norm() <= r) l1 += grad_norm(y);
    }
    l1 *= std::pow(h, d);
  }
  out.rhs = 12.0 / (unit_ball_volume(d) * std::pow(eta, d)) * l1;
  return out;
}

void write_singular_report_csv(std::ostream& os, const SingularSetReport& report) {
  const auto d = report.centers.rows();
  for (Index k = 0; k < d; ++k) os << (k ? "," : "") << 'x' << (k + 1);
  os << '\n';
  for (Index c = 0; c < report.centers.cols(); ++c) {
    for (Index k = 0; k < d; ++k) os << (k ? "," : "") << format_double(report.centers(k, c));
    os << '\n';
  }
  os << "# eta=" << format_double(report.eta) << " alpha=" << format_double(report.alpha)
     << " R=" << format_double(report.radius) << " count=" << report.count << " detected=" << report.detected
     << " bound=" << format_double(report.theorem_bound)
     << " hausdorff_estimate=" << format_double(report.hausdorff_estimate) << '\n';
}

}  // namespace pushstab
