// Command-line front end for the scenario runners.
//
// Exit codes: 0 all audits passed, 2 bound violation, 1 usage error.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "pushstab/csv.hpp"
#include "pushstab/experiments.hpp"

namespace {

using pushstab::ExperimentReport;
using pushstab::SweepConfig;

struct Options {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  double eps_min = 0.0, eps_max = 0.0;
  int eps_count = 0;
  double p = 0.0, q = 0.0, r = 0.0;
  int grid = 0;
  std::string id;
  int instances_1d = -1, instances_2d = -1;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "config file (JSON or key = value lines)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "PRNG seed");
  sub->add_option("--eps-min", o.eps_min, "smallest eps");
  sub->add_option("--eps-max", o.eps_max, "largest eps");
  sub->add_option("--eps-count", o.eps_count, "number of log-spaced eps values");
  sub->add_option("--p", o.p, "cost exponent (>= 2)");
  sub->add_option("--q", o.q, "output Wasserstein exponent");
  sub->add_option("--r", o.r, "input Wasserstein exponent");
  sub->add_option("--grid", o.grid, "grid resolution per axis");
}

bool given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* opt = sub->get_option_no_throw(name);
  return opt != nullptr && opt->count() > 0;
}

// Command-line values override the config file, which overrides defaults.
SweepConfig build_config(const Options& o, const std::string& scenario, const CLI::App* sub) {
  SweepConfig c = o.config.empty() ? SweepConfig{} : pushstab::load_sweep_config(o.config);
  c.scenario = scenario;
  if (given(sub, "--out")) c.out = o.out;
  if (given(sub, "--seed")) c.seed = o.seed;
  if (given(sub, "--p")) c.p = o.p;
  if (given(sub, "--q")) c.q = o.q;
  if (given(sub, "--r")) c.r = o.r;
  if (given(sub, "--grid")) c.grid = o.grid;
  const bool any_eps = given(sub, "--eps-min") || given(sub, "--eps-max") || given(sub, "--eps-count");
  if (any_eps) {
    if (!(given(sub, "--eps-min") && given(sub, "--eps-max") && given(sub, "--eps-count")))
      throw std::invalid_argument("--eps-min, --eps-max and --eps-count go together");
    c.eps = pushstab::logspace(o.eps_min, o.eps_max, o.eps_count);
  }
  if (given(sub, "--id")) c.example_id = o.id;
  if (given(sub, "--instances-1d")) c.instances_1d = o.instances_1d;
  if (given(sub, "--instances-2d")) c.instances_2d = o.instances_2d;
  c.validate();
  return c;
}

void print_summary(const ExperimentReport& rep) {
  std::cout << "scenario " << rep.scenario << ": " << rep.rows.size() << " rows, " << rep.violations
            << " violation(s)\n";
  if (rep.slope != 0.0)
    std::cout << "slope " << pushstab::format_double(rep.slope) << " +- " << pushstab::format_double(rep.slope_stderr)
              << " (theory " << pushstab::format_double(rep.theoretical_slope) << ")\n";
  if (rep.scenario.rfind("example", 0) == 0 || rep.rows.size() <= 12) {
    std::cout << "eps,input,output,bound\n";
    for (const auto& row : rep.rows)
      std::cout << pushstab::format_double(row.eps) << ',' << pushstab::format_double(row.input) << ','
                << pushstab::format_double(row.output) << ',' << pushstab::format_double(row.bound) << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pushforward stability experiments"};
  app.require_subcommand(1);
  Options o;
  auto* example = app.add_subcommand("example", "closed-form examples 1.2, 1.3, 1.4");
  example->add_option("--id", o.id, "example id")->required()->check(CLI::IsMember({"1.2", "1.3", "1.4"}));
  auto* rate = app.add_subcommand("rate-fit", "Holder rate fit on the (1-|x|)^p family");
  auto* audit = app.add_subcommand("stability-audit", "random-instance audit of the stability bound");
  audit->add_option("--instances-1d", o.instances_1d, "number of 1D instances");
  audit->add_option("--instances-2d", o.instances_2d, "number of 2D instances");
  auto* sing = app.add_subcommand("singularity", "singular-set covering and integral checks");
  auto* fig = app.add_subcommand("figure1", "interpolation between two point-cloud targets");
  for (auto* s : {example, rate, audit, sing, fig}) add_common(s, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentReport rep;
    if (example->parsed()) {
      SweepConfig c = build_config(o, "example", example);
      rep = pushstab::run_example(c.example_id, c);
      if (!c.out.empty()) {
        auto os = pushstab::open_output(c.out / ("example_" + c.example_id + ".csv"));
        pushstab::write_report_csv(os, rep);
      }
    } else if (rate->parsed()) {
      SweepConfig c = build_config(o, "rate-fit", rate);
      if (c.eps.empty()) c.eps = pushstab::logspace(1e-3, 1e-1, 7);
      rep = pushstab::fit_holder_rate(c);
    } else if (audit->parsed()) {
      rep = pushstab::audit_stability_bound(build_config(o, "stability", audit));
    } else if (sing->parsed()) {
      rep = pushstab::run_singularity_suite(build_config(o, "singularity", sing));
    } else {
      rep = pushstab::run_figure1(build_config(o, "figure1", fig));
    }
    print_summary(rep);
    return rep.passed() ? 0 : 2;
  } catch (const pushstab::BoundViolation& e) {
    std::cerr << "bound violation: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
