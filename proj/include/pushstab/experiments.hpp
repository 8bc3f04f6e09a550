#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "pushstab/measures.hpp"

namespace pushstab {

/// Parameters of one scenario run. Loaded from a JSON object or from
/// "key = value" lines with the same keys (see load_sweep_config).
struct SweepConfig {
  std::string scenario;
  std::vector<double> eps;  // log-spaced
  double p = 2.0;
  double q = 2.0;
  double r = 2.0;
  int grid = 70;
  std::uint64_t seed = 1;
  std::filesystem::path out;  // empty: nothing written

  std::string example_id = "1.2";
  int instances_1d = 200;
  int instances_2d = 50;
  std::vector<double> t_values{0.0, 0.25, 0.5, 0.75, 1.0};
  std::filesystem::path target0;  // figure1 point clouds; empty: built-in shapes
  std::filesystem::path target1;

  /// eps in (0, 1/2); for the stability scenario also q > p - 1 and r > 1.
  void validate() const;
};

/// n values from lo to hi, equally spaced in log scale (n >= 2).
std::vector<double> logspace(double lo, double hi, int n);

/// Keys: scenario, eps (list) or eps_min/eps_max/eps_count, p, q, r, grid,
/// seed, out, id, instances_1d, instances_2d, t (list), target0, target1.
SweepConfig parse_sweep_config(const std::string& text);
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct ReportRow {
  double eps = 0.0;
  double input = 0.0;   // W_r of the sources
  double output = 0.0;  // W_q of the images
  double bound = 0.0;   // bound being audited (NaN when none)
  std::vector<double> extra;
};

struct ExperimentReport {
  std::string scenario;
  std::vector<std::string> extra_columns;
  std::vector<ReportRow> rows;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double theoretical_slope = 0.0;
  std::map<std::string, double> constants;
  std::map<std::string, std::string> notes;
  Index violations = 0;

  bool passed() const { return violations == 0; }
};

/// Header "eps,input,output,bound[,extra...]", one row each, then
/// "# key=value" lines for slope, constants and notes.
void write_report_csv(std::ostream& os, const ExperimentReport& report);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

/// Least squares of log(y) on log(x). Needs two distinct positive x.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Theorem constant 2^(8(d+1)) p^3 (q/(q-p+1))^(1/q) d^2 (1+beta_d)(1+M)(1+R)^(2+p+d).
double stability_constant(int d, double q, double p, double radius, double density_bound);

/// Examples "1.2", "1.3", "1.4" (eps from cfg.eps; defaults 0.1). Rows hold
/// (eps, input W_2, output W_2, closed-form value of the output); the extra column
/// closed_form_input holds the closed-form input distance.
ExperimentReport run_example(const std::string& id, const SweepConfig& cfg);

/// Discrete-solver cross-check of the absolutely continuous example: the
/// uniform source on [-eps/2, eps/2] split into `cells` cells.
struct DiscreteExampleCheck {
  double input = 0.0;
  double output = 0.0;
};
DiscreteExampleCheck example_discrete_check(double eps, int cells);

/// Example 1.4 family with phi = (1 - |x|)^p across cfg.eps; slope of
/// log W_q(images) against log W_r(sources). The largest eps is dropped
/// from the fit when its input exceeds R/10.
ExperimentReport fit_holder_rate(const SweepConfig& cfg);

/// Rate fit over precomputed rows (input, output); used for synthetic data.
ExperimentReport fit_rows(std::vector<ReportRow> rows, double radius, double theoretical_slope);

/// Random c-concave potentials, grid density rho and perturbed discrete
/// rho~; both stability inequalities (W_r and W_inf forms) per instance.
/// Throws BoundViolation with an instance dump on a violation or NaN.
ExperimentReport audit_stability_bound(const SweepConfig& cfg);

/// Covering-number tightness on xi(N, L, R), |.| integral scaling, and the
/// bound audits on random max-affine instances.
ExperimentReport run_singularity_suite(const SweepConfig& cfg);

/// Interpolation between two point-cloud targets through Brenier potentials
/// fitted on a grid x grid uniform source over [0, 1]^2. Writes one CSV and
/// one SVG per t plus manifest.csv into cfg.out (when set).
ExperimentReport run_figure1(const SweepConfig& cfg);

/// Built-in targets for run_figure1 in [0, 1]^2 with `count` points each:
/// 0 is two concentric rings, 1 two disks (count must divide grid^2 for a map-like plan).
DiscreteMeasure figure1_target(int which, int count);

}  // namespace pushstab
