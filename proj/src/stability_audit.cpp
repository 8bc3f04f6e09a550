#include <algorithm>
#include <cmath>
#include <sstream>

#include "experiments_internal.hpp"
#include "parallel.hpp"
#include "pushstab/csv.hpp"
#include "pushstab/experiments.hpp"
#include "pushstab/potential.hpp"
#include "pushstab/pushforward.hpp"
#include "pushstab/svg.hpp"
#include "pushstab/transport.hpp"

namespace pushstab {

namespace {

constexpr double kRadius = 1.0;

struct Instance {
  Mat targets;
  Vec psi;
  std::string rho;  // description for dumps
  DiscreteMeasure rho_tilde;
  double delta = 0.0;
  SelectionPolicy policy;
};

SelectionPolicy pick_policy(Rng& rng) {
  switch (rng.index(3)) {
    case 0: return SelectionPolicy::min_norm();
    case 1: return SelectionPolicy::max_first_coordinate();
    default: return SelectionPolicy::fixed_index(static_cast<Index>(rng.index(3)));
  }
}

// Random c-bar transform whose displacement |x - T(x)| stays <= R on the
// domain, which keeps phi pR^(p-1)-Lipschitz and the convex side convex.
CConcavePotential random_potential(Rng& rng, const Domain& dom, double p, Mat& targets, Vec& psi) {
  const int d = dom.dim();
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const int m = (d == 1 ? 2 : 3) + static_cast<int>(rng.index(d == 1 ? 4 : 5));
    targets = Mat(d, m);
    psi = Vec(m);
    for (int j = 0; j < m; ++j) {
      targets.col(j) = d == 1 ? Vec::Constant(1, rng.uniform(-0.9, 0.9)) : rng.in_ball(Vec::Zero(d), 0.8);
      psi[j] = rng.uniform(0.0, 0.05);
    }
    CConcavePotential pot = CConcavePotential::c_bar_transform(PCost(p, kRadius), dom, targets, psi);
    bool ok = true;
    const int steps = d == 1 ? 2000 : 60;
    if (d == 1) {
      for (int i = 0; i <= steps && ok; ++i) {
        const Vec x = Vec::Constant(1, -kRadius + 2.0 * kRadius * i / steps);
        ok = (x - targets.col(laguerre_cell(pot, x))).norm() <= kRadius;
      }
    } else {
      for (int i = 0; i <= steps && ok; ++i)
        for (int k = 0; k <= steps && ok; ++k) {
          Vec x(2);
          x << -kRadius + 2.0 * kRadius * i / steps, -kRadius + 2.0 * kRadius * k / steps;
          if (x.norm() > kRadius) continue;
          ok = (x - targets.col(laguerre_cell(pot, x))).norm() <= kRadius;
        }
    }
    if (!ok) continue;
    if (!audit_potential(pot, rng, 500).ok) continue;
    return pot;
  }
  throw std::runtime_error("stability audit: could not sample an admissible potential");
}

std::string dump(const Instance& inst, std::uint64_t seed, std::size_t index) {
  std::ostringstream os;
  os.precision(17);
  os << "instance " << index << " (seed " << seed << ")\n";
  os << "targets:\n" << inst.targets << "\npsi: " << inst.psi.transpose() << "\nrho: " << inst.rho << '\n';
  os << "policy: " << inst.policy.describe() << "  jitter: " << inst.delta << '\n';
  os << "rho~ points:\n" << inst.rho_tilde.points() << "\nrho~ weights: " << inst.rho_tilde.weights().transpose() << '\n';
  return os.str();
}

// Perturbs atoms by up to delta (kept in the domain) and masses by up to 20%.
DiscreteMeasure perturb(Rng& rng, const DiscreteMeasure& base, double delta) {
  Mat pts = base.points();
  Vec w = base.weights();
  const Domain& dom = base.domain();
  for (Index i = 0; i < pts.cols(); ++i) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      const Vec cand = pts.col(i) + rng.in_ball(Vec::Zero(pts.rows()), delta);
      if (dom.contains(cand, 0.0)) {
        pts.col(i) = cand;
        break;
      }
    }
    w[i] *= 1.0 + rng.uniform(-0.2, 0.2);
  }
  return DiscreteMeasure::normalized(dom, std::move(pts), std::move(w));
}

struct Outcome {
  ReportRow row;
  std::string dump;
};

Outcome run_1d(const SweepConfig& cfg, std::size_t index) {
  Rng rng(detail::mix_seed(cfg.seed, 101, index));
  const Domain dom = Domain::interval(-kRadius, kRadius);
  Instance inst{Mat(), Vec(), "", DiscreteMeasure::dirac(dom, Vec::Zero(1)), 0.0, pick_policy(rng)};
  const CConcavePotential pot = random_potential(rng, dom, cfg.p, inst.targets, inst.psi);

  // rho: piecewise uniform on [-0.8, 0.8] with k random pieces.
  const int k = 1 + static_cast<int>(rng.index(4));
  std::vector<Interval> ivs;
  double total = 0.0;
  for (int i = 0; i < k; ++i) {
    const double lo = -0.8 + 1.6 * i / k, hi = -0.8 + 1.6 * (i + 1) / k;
    ivs.push_back({lo, hi, rng.uniform(0.2, 1.0)});
    total += ivs.back().mass;
  }
  double density_bound = 0.0;
  for (auto& iv : ivs) {
    iv.mass /= total;
    density_bound = std::max(density_bound, iv.mass / (iv.hi - iv.lo));
  }
  const Measure1D rho(dom, ivs, {});
  inst.rho = "piecewise uniform, " + std::to_string(k) + " pieces on [-0.8, 0.8]";

  inst.delta = std::pow(10.0, rng.uniform(-4.0, -1.0));
  DiscreteMeasure tilde = perturb(rng, discretize(rho, 4 + static_cast<int>(rng.index(37))), inst.delta);
  // Half the instances get one atom moved onto a cell boundary of T.
  if (rng.index(2) == 0 && inst.targets.cols() > 1) {
    double a = -kRadius, b = kRadius;
    const Index ca = laguerre_cell(pot, Vec::Constant(1, a));
    if (laguerre_cell(pot, Vec::Constant(1, b)) != ca) {
      for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double mid = 0.5 * (a + b);
        (laguerre_cell(pot, Vec::Constant(1, mid)) == ca ? a : b) = mid;
      }
      Mat pts = tilde.points();
      pts(0, static_cast<Index>(rng.index(static_cast<std::size_t>(pts.cols())))) = a;
      tilde = DiscreteMeasure(dom, std::move(pts), tilde.weights());
    }
  }
  inst.rho_tilde = tilde;

  const Vec masses = laguerre_masses(pot, rho);
  const DiscreteMeasure image(dom, inst.targets, masses);
  const auto pushed = pushforward_tmap(pot, inst.rho_tilde, inst.policy);
  const double lhs = wasserstein(image, pushed.image, cfg.q);
  const Measure1D tilde_1d = Measure1D::from_discrete(inst.rho_tilde);
  const double w_r = wasserstein_1d(rho, tilde_1d, cfg.r);
  const double w_inf = wasserstein_1d(rho, tilde_1d, kInfinity);
  const double c = stability_constant(1, cfg.q, cfg.p, kRadius, density_bound);
  const double bound_r = c * std::pow(w_r, cfg.r / (cfg.q * (cfg.r + 1.0)));
  const double bound_inf = c * std::pow(w_inf, 1.0 / cfg.q);
  return {{inst.delta, w_r, lhs, bound_r,
           {1.0, w_inf, bound_inf, 0.0, static_cast<double>(pushed.singular_hits), density_bound}},
          dump(inst, cfg.seed, index)};
}

Outcome run_2d(const SweepConfig& cfg, std::size_t index) {
  Rng rng(detail::mix_seed(cfg.seed, 202, index));
  const Domain dom = Domain::ball(2, kRadius);
  Instance inst{Mat(), Vec(), "", DiscreteMeasure::dirac(dom, Vec::Zero(2)), 0.0, pick_policy(rng)};
  const CConcavePotential pot = random_potential(rng, dom, cfg.p, inst.targets, inst.psi);

  const Box support{Vec::Constant(2, -0.7), Vec::Constant(2, 0.7)};
  const int res = 8, sub = 4;
  std::vector<double> masses(static_cast<std::size_t>(res * res));
  double total = 0.0;
  for (double& m : masses) total += (m = rng.uniform(0.2, 1.0));
  double top = 0.0;
  for (double& m : masses) top = std::max(top, m /= total);
  const double cell_vol = support.volume() / (res * res);
  const double density_bound = top / cell_vol;
  const GridDensity rho = GridDensity::from_masses(dom, support, {res, res}, masses, density_bound);
  // Same density on a finer grid: each cell split into sub x sub cells.
  std::vector<double> fine(static_cast<std::size_t>(res * sub * res * sub));
  for (int i = 0; i < res * sub; ++i)
    for (int j = 0; j < res * sub; ++j)
      fine[static_cast<std::size_t>(j * res * sub + i)] =
          masses[static_cast<std::size_t>((j / sub) * res + i / sub)] / (sub * sub);
  const DiscreteMeasure rho_fine =
      discretize(GridDensity::from_masses(dom, support, {res * sub, res * sub}, fine, density_bound));
  const double half_diag = 0.5 * std::sqrt(2.0) * (support.hi[0] - support.lo[0]) / (res * sub);
  inst.rho = "8x8 grid density on [-0.7, 0.7]^2, M = " + format_double(density_bound);

  inst.delta = std::pow(10.0, rng.uniform(-3.0, -1.0));
  inst.rho_tilde = perturb(rng, discretize(rho), inst.delta);

  // Upper bound on the left side: quadrature image plus the straddling mass
  // moved at most diam(domain).
  const LaguerreQuadrature quad = laguerre_masses(pot, rho, 16);
  const DiscreteMeasure image(dom, inst.targets, quad.masses);
  const auto pushed = pushforward_tmap(pot, inst.rho_tilde, inst.policy);
  const double lhs =
      wasserstein(image, pushed.image, cfg.q) + 2.0 * kRadius * std::pow(quad.straddle_mass, 1.0 / cfg.q);
  // Lower bounds on the source distances through the fine discretization.
  const double w_r = std::max(0.0, wasserstein(rho_fine, inst.rho_tilde, cfg.r) - half_diag);
  const double w_inf = std::max(0.0, bottleneck_transport(rho_fine, inst.rho_tilde).value - half_diag);
  const double c = stability_constant(2, cfg.q, cfg.p, kRadius, density_bound);
  const double bound_r = c * std::pow(w_r, cfg.r / (cfg.q * (cfg.r + 1.0)));
  const double bound_inf = c * std::pow(w_inf, 1.0 / cfg.q);
  return {{inst.delta, w_r, lhs, bound_r,
           {2.0, w_inf, bound_inf, quad.straddle_mass, static_cast<double>(pushed.singular_hits), density_bound}},
          dump(inst, cfg.seed, index)};
}

}  // namespace

ExperimentReport audit_stability_bound(const SweepConfig& cfg) {
  SweepConfig c = cfg;
  c.scenario = "stability";
  c.validate();
  const std::size_t n1 = static_cast<std::size_t>(std::max(0, cfg.instances_1d));
  const std::size_t n2 = static_cast<std::size_t>(std::max(0, cfg.instances_2d));
  std::vector<Outcome> out(n1 + n2);
  detail::parallel_for(n1 + n2, [&](std::size_t i) { out[i] = i < n1 ? run_1d(c, i) : run_2d(c, i - n1); });

  ExperimentReport rep;
  rep.scenario = "stability";
  rep.extra_columns = {"dim", "input_inf", "bound_inf", "straddle_mass", "singular_hits", "M_rho"};
  rep.theoretical_slope = c.r / (c.q * (c.r + 1.0));
  std::string first_failure;
  for (auto& o : out) {
    const ReportRow& row = o.row;
    for (double v : {row.input, row.output, row.bound, row.extra[1], row.extra[2]})
      if (!std::isfinite(v)) throw BoundViolation("stability audit: NaN or infinite value\n" + o.dump);
    if (!(row.output <= row.bound) || !(row.output <= row.extra[2])) {
      ++rep.violations;
      if (first_failure.empty()) first_failure = o.dump;
    }
    rep.rows.push_back(std::move(o.row));
  }
  rep.constants["p"] = c.p;
  rep.constants["q"] = c.q;
  rep.constants["r"] = c.r;
  rep.constants["R"] = kRadius;
  rep.constants["c_1d_M1"] = stability_constant(1, c.q, c.p, kRadius, 1.0);
  rep.constants["c_2d_M1"] = stability_constant(2, c.q, c.p, kRadius, 1.0);
  rep.constants["Lip"] = PCost(c.p, kRadius).lipschitz();
  rep.constants["C_pR"] = PCost(c.p, kRadius).concavity();
  rep.notes["lhs_2d"] = "sub-cell quadrature (16x16) plus 2R * straddle_mass^(1/q)";
  rep.notes["input_2d"] = "fine-grid distance minus half the fine cell diagonal";
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out / "stability.csv");
    write_report_csv(os, rep);
    SvgPlot plot{"stability audit", "input W_r", "output W_q", true, true, false, {}};
    SvgSeries a{"1D", {}, {}, false, "#1f77b4", 2.5};
    SvgSeries b{"2D", {}, {}, false, "#ff7f0e", 2.5};
    for (const auto& row : rep.rows)
      if (row.input > 0.0 && row.output > 0.0) {
        auto& s = row.extra[0] == 1.0 ? a : b;
        s.x.push_back(row.input);
        s.y.push_back(row.output);
      }
    plot.series = {a, b};
    write_svg(cfg.out / "stability.svg", plot);
  }
  if (rep.violations > 0) {
    if (!cfg.out.empty()) {
      auto os = open_output(cfg.out / "stability_violation.txt");
      os << first_failure;
    }
    throw BoundViolation("stability audit: " + std::to_string(rep.violations) + " violation(s); first:\n" +
                         first_failure);
  }
  return rep;
}

}  // namespace pushstab
