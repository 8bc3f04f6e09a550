#include <cmath>
#include <cstdio>
#include <numbers>

#include "experiments_internal.hpp"
#include "pushstab/csv.hpp"
#include "pushstab/experiments.hpp"
#include "pushstab/pushforward.hpp"
#include "pushstab/svg.hpp"
#include "pushstab/transport.hpp"

namespace pushstab {

namespace {

Domain unit_square() { return Domain::box(Vec::Zero(2), Vec::Ones(2)); }

// Vogel spiral: near-uniform fill of a disk.
void spiral(Mat& pts, Index first, Index count, double cx, double cy, double radius) {
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (Index k = 0; k < count; ++k) {
    const double rr = radius * std::sqrt((k + 0.5) / static_cast<double>(count));
    pts(0, first + k) = cx + rr * std::cos(golden * k);
    pts(1, first + k) = cy + rr * std::sin(golden * k);
  }
}

// Per-atom image under the interpolant, read back from the coupling.
Mat atom_images(const PushforwardResult& res, Index n) {
  Mat out(2, n);
  for (const auto& e : res.coupling.entries()) out.col(e.i) = res.image.point(e.j);
  return out;
}

}  // namespace

DiscreteMeasure figure1_target(int which, int count) {
  if (count < 2) throw std::invalid_argument("figure1_target: count must be >= 2");
  Mat pts(2, count);
  if (which == 0) {
    // Two concentric rings, rotated off the grid axes so the plan has no ties.
    const Index inner = count / 2;
    for (Index k = 0; k < count; ++k) {
      const bool in = k < inner;
      const Index m = in ? inner : count - inner;
      const Index j = in ? k : k - inner;
      const double a = 2.0 * std::numbers::pi * (j + (in ? 0.0 : 0.5) + 0.137) / static_cast<double>(m);
      const double rr = in ? 0.2 : 0.35;
      pts(0, k) = 0.503 + rr * std::cos(a);
      pts(1, k) = 0.498 + rr * std::sin(a);
    }
  } else if (which == 1) {
    // Two filled disks on the diagonal.
    const Index half = count / 2;
    spiral(pts, 0, half, 0.3, 0.3, 0.17);
    spiral(pts, half, count - half, 0.7, 0.7, 0.17);
  } else {
    throw std::invalid_argument("figure1_target: which must be 0 or 1");
  }
  return DiscreteMeasure::uniform(unit_square(), std::move(pts));
}

ExperimentReport run_figure1(const SweepConfig& cfg) {
  cfg.validate();
  const int g = cfg.grid;
  const Index cells = static_cast<Index>(g) * g;
  // Largest divisor of the cell count not above 200 keeps the plan a map.
  int count = 1;
  for (int k = 1; k <= 200; ++k)
    if (cells % k == 0) count = k;
  if (count < 2) throw std::invalid_argument("run_figure1: grid too small");

  const Domain square = unit_square();
  const DiscreteMeasure target0 = cfg.target0.empty() ? figure1_target(0, count) : read_point_cloud_csv(cfg.target0, square);
  const DiscreteMeasure target1 = cfg.target1.empty() ? figure1_target(1, count) : read_point_cloud_csv(cfg.target1, square);
  const DiscreteMeasure rho = discretize(GridDensity::uniform(square, {g, g}));
  const double cell_diag = std::sqrt(2.0) / g;

  const BrenierPotential u0 = potential_from_discrete_ot(rho, target0);
  const BrenierPotential u1 = potential_from_discrete_ot(rho, target1);
  const SelectionPolicy policy = SelectionPolicy::min_norm();

  const auto end0 = lot_interpolant(u0.potential, u1.potential, 0.0, rho, policy, square);
  const auto end1 = lot_interpolant(u0.potential, u1.potential, 1.0, rho, policy, square);
  const Mat t0 = atom_images(end0, rho.size());
  const Mat t1 = atom_images(end1, rho.size());
  double l2 = 0.0;
  for (Index i = 0; i < rho.size(); ++i) l2 += rho.weight(i) * (t1.col(i) - t0.col(i)).squaredNorm();
  l2 = std::sqrt(l2);

  ExperimentReport rep;
  rep.scenario = "figure1";
  rep.extra_columns = {"atoms", "singular_hits", "target_residual"};
  const double residual0 = wasserstein(end0.image, target0, 2.0);
  const double residual1 = wasserstein(end1.image, target1, 2.0);
  if (!(residual0 <= 2.0 * cell_diag)) ++rep.violations;
  if (!(residual1 <= 2.0 * cell_diag)) ++rep.violations;

  double previous = 0.0;
  bool monotone = true;
  std::string manifest = "t,csv,svg,atoms,singular_hits,w2_to_mu0\n";
  for (std::size_t k = 0; k < cfg.t_values.size(); ++k) {
    const double t = cfg.t_values[k];
    const auto res = t == 0.0 ? end0 : t == 1.0 ? end1 : lot_interpolant(u0.potential, u1.potential, t, rho, policy, square);
    const double w = t == 0.0 ? 0.0 : wasserstein(end0.image, res.image, 2.0);
    detail::require_finite(w, "interpolant distance");
    const double bound = t * l2;
    const double residual = t == 0.0 ? residual0 : t == 1.0 ? residual1 : std::nan("");
    rep.rows.push_back({t, bound, w, bound,
                        {static_cast<double>(res.image.size()), static_cast<double>(res.singular_hits), residual}});
    if (!(w <= bound * (1.0 + 1e-9) + 1e-12)) ++rep.violations;
    if (k > 0 && t > cfg.t_values[k - 1] && w < previous - 1e-12) monotone = false;
    previous = w;
    if (!cfg.out.empty()) {
      char stem[64];
      std::snprintf(stem, sizeof stem, "mu_%02zu_t%.4g", k, t);
      write_point_cloud_csv(cfg.out / (std::string(stem) + ".csv"), res.image);
      SvgPlot plot{"interpolant t = " + format_double(t), "x1", "x2", false, false, true, {}};
      SvgSeries s{"", {}, {}, false, "#1f77b4", 1.6};
      for (Index i = 0; i < res.image.size(); ++i) {
        s.x.push_back(res.image.point(i)[0]);
        s.y.push_back(res.image.point(i)[1]);
      }
      plot.series = {s};
      write_svg(cfg.out / (std::string(stem) + ".svg"), plot);
      manifest += format_double(t) + "," + stem + ".csv," + stem + ".svg," + std::to_string(res.image.size()) + "," +
                  std::to_string(res.singular_hits) + "," + format_double(w) + "\n";
    }
  }
  if (!monotone) ++rep.violations;
  rep.notes["w2_to_mu0_monotone"] = monotone ? "yes" : "no";
  rep.constants["grid"] = g;
  rep.constants["targets"] = static_cast<double>(count);
  rep.constants["cell_diagonal"] = cell_diag;
  rep.constants["residual0"] = residual0;
  rep.constants["residual1"] = residual1;
  rep.constants["l2_map_distance"] = l2;
  rep.constants["margin0"] = u0.margin;
  rep.constants["margin1"] = u1.margin;
  rep.notes["refined_duals"] = std::string(u0.refined ? "yes" : "no") + "/" + (u1.refined ? "yes" : "no");
  rep.notes["bound_column"] = "t * ||T1 - T0||_L2(rho), a bound on W2(mu_0, mu_t)";
  rep.notes["policy"] = policy.describe();
  if (!cfg.out.empty()) {
    write_point_cloud_csv(cfg.out / "target0.csv", target0);
    write_point_cloud_csv(cfg.out / "target1.csv", target1);
    auto os = open_output(cfg.out / "manifest.csv");
    os << manifest;
    auto rs = open_output(cfg.out / "figure1.csv");
    write_report_csv(rs, rep);
  }
  return rep;
}

}  // namespace pushstab
