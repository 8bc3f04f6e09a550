#include "pushstab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "document.hpp"
#include "experiments_internal.hpp"
#include "parallel.hpp"
#include "pushstab/csv.hpp"
#include "pushstab/potential.hpp"
#include "pushstab/pushforward.hpp"
#include "pushstab/singular_sets.hpp"
#include "pushstab/svg.hpp"
#include "pushstab/transport.hpp"

namespace pushstab {

// ---------------------------------------------------------------------------
// Config

void SweepConfig::validate() const {
  for (double e : eps)
    if (!(e > 0.0 && e < 0.5)) throw std::invalid_argument("SweepConfig: eps values must lie in (0, 1/2)");
  if (!(p >= 2.0)) throw std::invalid_argument("SweepConfig: p must be >= 2");
  if (!(q >= 1.0) || !(r >= 1.0)) throw std::invalid_argument("SweepConfig: q and r must be >= 1");
  if (scenario == "stability") {
    if (!(q > p - 1.0)) throw std::invalid_argument("SweepConfig: stability needs q > p - 1");
    if (!(r > 1.0)) throw std::invalid_argument("SweepConfig: stability needs r > 1");
  }
  if (grid < 1) throw std::invalid_argument("SweepConfig: grid must be >= 1");
  for (double t : t_values)
    if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("SweepConfig: t values must lie in [0, 1]");
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("logspace: need n >= 2 and 0 < lo < hi");
  std::vector<double> out(static_cast<std::size_t>(n));
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

namespace {

SweepConfig config_from_json(const nlohmann::json& j) {
  SweepConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "scenario") c.scenario = v.get<std::string>();
      else if (key == "eps") c.eps = v.get<std::vector<double>>();
      else if (key == "eps_min" || key == "eps_max" || key == "eps_count") continue;
      else if (key == "p") c.p = v.get<double>();
      else if (key == "q") c.q = v.get<double>();
      else if (key == "r") c.r = v.get<double>();
      else if (key == "grid") c.grid = v.get<int>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "id") c.example_id = v.is_string() ? v.get<std::string>() : format_double(v.get<double>());
      else if (key == "instances_1d") c.instances_1d = v.get<int>();
      else if (key == "instances_2d") c.instances_2d = v.get<int>();
      else if (key == "t") c.t_values = v.get<std::vector<double>>();
      else if (key == "target0") c.target0 = v.get<std::string>();
      else if (key == "target1") c.target1 = v.get<std::string>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    if (j.contains("eps_min") || j.contains("eps_max") || j.contains("eps_count")) {
      if (j.contains("eps")) throw std::invalid_argument("config: give either eps or eps_min/eps_max/eps_count");
      c.eps = logspace(j.at("eps_min").get<double>(), j.at("eps_max").get<double>(), j.at("eps_count").get<int>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

}  // namespace

SweepConfig parse_sweep_config(const std::string& text) { return config_from_json(detail::parse_document(text)); }

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return config_from_json(detail::load_document(path.string()));
}

// ---------------------------------------------------------------------------
// Reports

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  os << "eps,input,output,bound";
  for (const auto& c : report.extra_columns) os << ',' << c;
  os << '\n';
  for (const auto& row : report.rows) {
    os << format_double(row.eps) << ',' << format_double(row.input) << ',' << format_double(row.output) << ','
       << format_double(row.bound);
    for (double v : row.extra) os << ',' << format_double(v);
    os << '\n';
  }
  os << "# scenario=" << report.scenario << '\n';
  os << "# slope=" << format_double(report.slope) << '\n';
  os << "# slope_stderr=" << format_double(report.slope_stderr) << '\n';
  os << "# theoretical_slope=" << format_double(report.theoretical_slope) << '\n';
  os << "# violations=" << report.violations << '\n';
  for (const auto& [k, v] : report.constants) os << "# " << k << '=' << format_double(v) << '\n';
  for (const auto& [k, v] : report.notes) os << "# " << k << '=' << v << '\n';
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_loglog: need two or more points");
  const std::size_t n = x.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("fit_loglog: values must be positive and finite");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 1e-24)) throw std::invalid_argument("fit_loglog: degenerate sweep (identical inputs)");
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double res = ly[i] - fit.intercept - fit.slope * lx[i];
      ssr += res * res;
    }
    fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

double stability_constant(int d, double q, double p, double radius, double density_bound) {
  if (!(q > p - 1.0)) throw std::invalid_argument("stability_constant: needs q > p - 1");
  const double dd = d;
  return std::pow(2.0, 8.0 * (dd + 1.0)) * p * p * p * std::pow(q / (q - p + 1.0), 1.0 / q) * dd * dd *
         (1.0 + unit_ball_volume(d)) * (1.0 + density_bound) * std::pow(1.0 + radius, 2.0 + p + dd);
}

ExperimentReport fit_rows(std::vector<ReportRow> rows, double radius, double theoretical_slope) {
  ExperimentReport rep;
  rep.rows = std::move(rows);
  rep.theoretical_slope = theoretical_slope;
  std::vector<double> xs, ys;
  std::size_t skip = rep.rows.size();
  if (!rep.rows.empty()) {
    const auto largest = std::max_element(rep.rows.begin(), rep.rows.end(),
                                          [](const ReportRow& a, const ReportRow& b) { return a.eps < b.eps; });
    if (largest->input > radius / 10.0) {
      skip = static_cast<std::size_t>(largest - rep.rows.begin());
      rep.notes["excluded_eps"] = format_double(largest->eps);
    }
  }
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (i == skip) continue;
    xs.push_back(rep.rows[i].input);
    ys.push_back(rep.rows[i].output);
  }
  const SlopeFit fit = fit_loglog(xs, ys);
  rep.slope = fit.slope;
  rep.slope_stderr = fit.stderr_slope;
  rep.constants["fit_intercept"] = fit.intercept;
  rep.constants["fit_points"] = static_cast<double>(xs.size());
  rep.notes["fit_rule"] = "largest eps dropped when its input distance exceeds R/10";
  return rep;
}

// ---------------------------------------------------------------------------
// 1D closed-form pushforward

Measure1D detail::push_1d(const MaxAffineFunction& f, const Measure1D& m, const SelectionPolicy& policy,
                          const Domain& image) {
  if (f.dim() != 1) throw std::invalid_argument("push_1d: one-dimensional function expected");
  const std::vector<double> kinks = f.kinks();
  std::vector<Atom> atoms;
  auto slope_at = [&](double x) {
    const SubdiffPolytope s = subdifferential(f, Vec::Constant(1, x));
    return s.vertices(0, 0);
  };
  for (const auto& iv : m.intervals()) {
    if (iv.mass <= 0.0) continue;
    std::vector<double> cuts{iv.lo};
    for (double k : kinks)
      if (k > iv.lo && k < iv.hi) cuts.push_back(k);
    cuts.push_back(iv.hi);
    const double density = iv.mass / (iv.hi - iv.lo);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s)
      atoms.push_back({slope_at(0.5 * (cuts[s] + cuts[s + 1])), density * (cuts[s + 1] - cuts[s])});
  }
  for (std::size_t a = 0; a < m.atoms().size(); ++a) {
    const Atom& at = m.atoms()[a];
    const SubdiffPolytope s = subdifferential(f, Vec::Constant(1, at.location));
    const double g = s.diameter() > 1e-10 ? policy.select(s, static_cast<Index>(a))[0] : s.vertices(0, 0);
    atoms.push_back({g, at.mass});
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.location < b.location; });
  std::vector<Atom> merged;
  for (const Atom& a : atoms) {
    if (!merged.empty() && merged.back().location == a.location)
      merged.back().mass += a.mass;
    else
      merged.push_back(a);
  }
  return Measure1D(image, {}, std::move(merged));
}

// ---------------------------------------------------------------------------
// Examples

DiscreteExampleCheck example_discrete_check(double eps, int cells) {
  const Domain dom = Domain::interval(-1.0, 1.0);
  const auto f = MaxAffineFunction::abs();
  const DiscreteMeasure rho = DiscreteMeasure::dirac(dom, Vec::Zero(1));
  const DiscreteMeasure rho_eps = discretize(Measure1D::uniform(dom, -0.5 * eps, 0.5 * eps), cells);
  const auto img = pushforward_convex(f, rho, SelectionPolicy::max_first_coordinate());
  const auto img_eps = pushforward_convex(f, rho_eps, SelectionPolicy::max_first_coordinate());
  return {wasserstein(rho, rho_eps, 2.0), wasserstein(img.image, img_eps.image, 2.0)};
}

ExperimentReport run_example(const std::string& id, const SweepConfig& cfg) {
  const Domain dom = Domain::interval(-1.0, 1.0);
  const Domain image = Domain::ball(1, 1.0);
  const auto f = MaxAffineFunction::abs();
  // gamma = delta_(0,1) and gamma~ = delta_(0,-1): the two extreme vertices of [-1, 1].
  const SelectionPolicy up = SelectionPolicy::max_first_coordinate();
  const SelectionPolicy down = SelectionPolicy::fixed_index(0);
  std::vector<double> eps = cfg.eps.empty() ? std::vector<double>{0.1} : cfg.eps;

  ExperimentReport rep;
  rep.scenario = "example-" + id;
  auto check = [&](double got, double want, double tol) {
    if (!(std::abs(got - want) <= tol)) ++rep.violations;
  };

  if (id == "1.2") {
    const Measure1D rho = Measure1D::dirac(dom, 0.0);
    const double output = wasserstein_1d(detail::push_1d(f, rho, up, image), detail::push_1d(f, rho, down, image), 2.0);
    const double input = wasserstein_1d(rho, rho, 2.0);
    rep.rows.push_back({0.0, input, output, 2.0, {0.0}});
    rep.extra_columns = {"closed_form_input"};
    check(output, 2.0, 0.0);
    check(input, 0.0, 0.0);
  } else if (id == "1.3") {
    rep.extra_columns = {"closed_form_input", "discrete_input", "discrete_output"};
    for (double e : eps) {
      const Measure1D rho = Measure1D::dirac(dom, 0.0);
      const Measure1D rho_eps = Measure1D::uniform(dom, -0.5 * e, 0.5 * e);
      const double output =
          wasserstein_1d(detail::push_1d(f, rho, up, image), detail::push_1d(f, rho_eps, up, image), 2.0);
      const double input = wasserstein_1d(rho, rho_eps, 2.0);
      const double closed_in = e / (2.0 * std::sqrt(3.0));
      const DiscreteExampleCheck disc = example_discrete_check(e, 10000);
      rep.rows.push_back({e, input, output, std::numbers::sqrt2, {closed_in, disc.input, disc.output}});
      check(output, std::numbers::sqrt2, 1e-12);
      check(input, closed_in, 1e-12);
      check(disc.input, input, 1e-3);
      check(disc.output, output, 1e-3);
    }
  } else if (id == "1.4") {
    rep.extra_columns = {"closed_form_input"};
    for (double e : eps) {
      const Measure1D rho = Measure1D::uniform(dom, -0.5, 0.5);
      const Measure1D rho_eps = Measure1D::lebesgue(dom, {{-0.5, -0.5 * e}, {0.5 * e, 0.5}}, {{0.0, e}});
      const double output =
          wasserstein_1d(detail::push_1d(f, rho, up, image), detail::push_1d(f, rho_eps, up, image), 2.0);
      const double input = wasserstein_1d(rho, rho_eps, 2.0);
      const double closed_out = std::sqrt(2.0 * e);
      const double closed_in = std::sqrt(e * e * e / 12.0);
      rep.rows.push_back({e, input, output, closed_out, {closed_in}});
      check(output, closed_out, 1e-12);
      check(input, closed_in, 1e-12);
    }
  } else {
    throw std::invalid_argument("run_example: unknown id '" + id + "' (expected 1.2, 1.3 or 1.4)");
  }
  rep.notes["bound_column"] = "closed-form value of the output distance";
  return rep;
}

// ---------------------------------------------------------------------------
// Rate fit on the (1 - |x|)^p family

ExperimentReport fit_holder_rate(const SweepConfig& cfg) {
  cfg.validate();
  if (cfg.eps.size() < 5) throw std::invalid_argument("fit_holder_rate: need at least 5 eps values");
  const auto [lo, hi] = std::minmax_element(cfg.eps.begin(), cfg.eps.end());
  if (*hi / *lo < 100.0 * (1.0 - 1e-12)) throw std::invalid_argument("fit_holder_rate: eps must span two decades");
  if (!(cfg.q > cfg.p - 1.0)) throw std::invalid_argument("fit_holder_rate: needs q > p - 1");

  const CConcavePotential pot = CConcavePotential::tightness(cfg.p);
  const Domain& dom = pot.domain();
  const double radius = pot.cost().radius;
  const double density_bound = 1.0;
  const double c = stability_constant(1, cfg.q, cfg.p, radius, density_bound);
  const double theory = cfg.r / (cfg.q * (cfg.r + 1.0));
  const SelectionPolicy policy = SelectionPolicy::max_first_coordinate();
  const int cells = 2 * std::max(cfg.grid, 1);  // even: no cell center at 0

  const Measure1D rho = Measure1D::uniform(dom, -0.5, 0.5);
  const auto img = pushforward_tmap(pot, discretize(rho, cells), policy);

  std::vector<ReportRow> rows(cfg.eps.size());
  detail::parallel_for(cfg.eps.size(), [&](std::size_t k) {
    const double e = cfg.eps[k];
    const Measure1D rho_eps = Measure1D::lebesgue(dom, {{-0.5, -0.5 * e}, {0.5 * e, 0.5}}, {{0.0, e}});
    const double input = wasserstein_1d(rho, rho_eps, cfg.r);
    const auto img_eps = pushforward_tmap(pot, discretize(rho_eps, cells), policy);
    const double output = wasserstein(img.image, img_eps.image, cfg.q);
    detail::require_finite(input, "input distance");
    detail::require_finite(output, "output distance");
    const double w_inf = wasserstein_1d(rho, rho_eps, kInfinity);
    rows[k] = {e, input, output, c * std::pow(input, theory),
               {2.0 * std::pow(0.5 * e, 1.0 / cfg.q), w_inf, c * std::pow(w_inf, 1.0 / cfg.q)}};
  });

  ExperimentReport rep = fit_rows(std::move(rows), radius, theory);
  rep.scenario = "rate-fit";
  rep.extra_columns = {"closed_form_output", "input_inf", "bound_inf"};
  for (const auto& row : rep.rows)
    if (!(row.output <= row.bound) || !(row.output <= row.extra[2])) ++rep.violations;
  rep.constants["c"] = c;
  rep.constants["p"] = cfg.p;
  rep.constants["q"] = cfg.q;
  rep.constants["r"] = cfg.r;
  rep.constants["R"] = radius;
  rep.constants["M_rho"] = density_bound;
  rep.constants["Lip"] = pot.cost().lipschitz();
  rep.constants["C_pR"] = pot.cost().concavity();
  rep.notes["policy"] = policy.describe();
  rep.notes["potential"] = "(1-|x|)^p on [-1,1]";
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out / "rate_fit.csv");
    write_report_csv(os, rep);
    SvgPlot plot{"rate fit: slope " + format_double(rep.slope), "input W_r", "output W_q", true, true, false, {}};
    SvgSeries pts{"measured", {}, {}, false, "#1f77b4", 3.0};
    SvgSeries line{"fit", {}, {}, true, "#d62728", 1.0};
    for (const auto& row : rep.rows) {
      pts.x.push_back(row.input);
      pts.y.push_back(row.output);
      line.x.push_back(row.input);
      line.y.push_back(std::exp(rep.constants["fit_intercept"]) * std::pow(row.input, rep.slope));
    }
    plot.series = {pts, line};
    write_svg(cfg.out / "rate_fit.svg", plot);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Singular sets

namespace {

enum SingularCase { kXi = 1, kAbsRatio = 2, kIntegral1D = 3, kIntegral2D = 4, kLemma = 5, kCovering2D = 6 };

}  // namespace

ExperimentReport run_singularity_suite(const SweepConfig& cfg) {
  ExperimentReport rep;
  rep.scenario = "singularity";
  rep.extra_columns = {"case", "param", "lip"};
  const double q = cfg.q > 1.0 ? cfg.q : 2.0;
  const double radius = 1.0;

  // Tightness family: count must equal N exactly.
  struct XiCase {
    int n;
    double lip;
    double eta;
  };
  std::vector<XiCase> xi;
  for (int n : {2, 4, 8, 16})
    for (double lip : {1.0, 3.0}) xi.push_back({n, lip, 0.9 * radius / (8.0 * (n + 1))});
  xi.push_back({8, 1.0, 1e-3});
  std::vector<ReportRow> xi_rows(xi.size());
  std::vector<double> xi_bound(xi.size());
  detail::parallel_for(xi.size(), [&](std::size_t k) {
    const auto& c = xi[k];
    const double alpha = 2.0 * c.lip / c.n;
    const auto rep_xi = covering_number_sigma(xi_function(c.n, c.lip, radius), c.eta, alpha, radius);
    xi_rows[k] = {c.eta, alpha, static_cast<double>(rep_xi.count), static_cast<double>(c.n),
                  {double(kXi), static_cast<double>(c.n), c.lip}};
    xi_bound[k] = rep_xi.theorem_bound;
  });
  for (std::size_t k = 0; k < xi.size(); ++k) {
    if (xi_rows[k].output != xi_rows[k].bound || xi_rows[k].output > xi_bound[k]) ++rep.violations;
    rep.rows.push_back(xi_rows[k]);
  }

  // |.|: the integral equals 8 eta exactly.
  for (double eta : {0.1, 0.05, 0.025}) {
    const auto est = integral_diam_estimate(MaxAffineFunction::abs(), eta, q, radius);
    const double ratio = est.estimate / eta;
    rep.rows.push_back({eta, eta, ratio, 8.0, {double(kAbsRatio), q, 1.0}});
    if (!(std::abs(ratio - 8.0) <= 1e-6)) ++rep.violations;
  }

  // Random instances: integral bound (1D and 2D), diameter lemma (2D) and
  // the covering bound (2D).
  struct RandomCase {
    int kind;
    int d;
    std::uint64_t index;
  };
  std::vector<RandomCase> cases;
  for (std::uint64_t i = 0; i < 100; ++i) cases.push_back({kIntegral1D, 1, i});
  for (std::uint64_t i = 0; i < 20; ++i) cases.push_back({kIntegral2D, 2, i});
  for (std::uint64_t i = 0; i < 100; ++i) cases.push_back({kLemma, 2, i});
  for (std::uint64_t i = 0; i < 5; ++i) cases.push_back({kCovering2D, 2, i});
  std::vector<ReportRow> rows(cases.size());
  detail::parallel_for(cases.size(), [&](std::size_t k) {
    const auto& c = cases[k];
    Rng rng(detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(c.kind), c.index));
    const Domain dom = Domain::ball(c.d, radius);
    const int pieces = 2 + static_cast<int>(rng.index(5));
    const double lip_max = rng.uniform(0.5, 3.0);
    const MaxAffineFunction f = random_max_affine(rng, dom, pieces, lip_max);
    const double lip = f.lipschitz();
    if (c.kind == kIntegral1D || c.kind == kIntegral2D) {
      const double eta = rng.uniform(0.02, 0.1);
      const auto est = integral_diam_estimate(f, eta, q, radius);
      rows[k] = {eta, eta, est.estimate, est.bound, {double(c.kind), static_cast<double>(pieces), lip}};
    } else if (c.kind == kLemma) {
      const double eta = rng.uniform(0.02, 0.1);
      const Vec x = rng.in_ball(Vec::Zero(2), 0.8 * radius);
      const LemmaCheck lc = verify_lemma_diam_l1(f, x, eta);
      rows[k] = {eta, x.norm(), lc.lhs, lc.rhs, {double(c.kind), static_cast<double>(pieces), lip}};
    } else {
      const double eta = rng.uniform(0.03, 0.08);
      const double alpha = rng.uniform(0.1, 1.0) * 2.0 * lip;
      const auto sr = covering_number_sigma(f, eta, alpha, radius);
      rows[k] = {eta, alpha, static_cast<double>(sr.count), sr.theorem_bound,
                 {double(c.kind), static_cast<double>(pieces), lip}};
    }
    detail::require_finite(rows[k].output, "singularity estimate");
    detail::require_finite(rows[k].bound, "singularity bound");
  });
  for (auto& row : rows) {
    if (!(row.output <= row.bound)) ++rep.violations;
    rep.rows.push_back(row);
  }
  rep.constants["R"] = radius;
  rep.constants["q"] = q;
  rep.notes["cases"] = "1 xi count (bound = N), 2 |.| integral/eta (bound = 8), 3/4 integral 1D/2D, "
                       "5 diameter lemma (bound = rhs), 6 covering bound 2D";
  if (!cfg.out.empty()) {
    auto os = open_output(cfg.out / "singularity.csv");
    write_report_csv(os, rep);
    SvgPlot plot{"estimate vs bound", "bound", "estimate", true, true, false, {}};
    const char* colors[] = {"", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    const char* names[] = {"", "xi count", "|.| ratio", "integral 1D", "integral 2D", "lemma", "covering 2D"};
    for (int kind = 1; kind <= 6; ++kind) {
      SvgSeries s{names[kind], {}, {}, false, colors[kind], 2.5};
      for (const auto& row : rep.rows)
        if (row.extra[0] == kind && row.bound > 0.0 && row.output > 0.0) {
          s.x.push_back(row.bound);
          s.y.push_back(row.output);
        }
      plot.series.push_back(std::move(s));
    }
    write_svg(cfg.out / "singularity.svg", plot);
  }
  return rep;
}

}  // namespace pushstab
