#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "pushstab/csv.hpp"
#include "pushstab/experiments.hpp"
#include "support.hpp"

using namespace pushstab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string report_text(const ExperimentReport& rep) {
  std::ostringstream os;
  write_report_csv(os, rep);
  return os.str();
}

}  // namespace

TEST_CASE("logspace") {
  const auto v = logspace(1e-3, 1e-1, 7);
  REQUIRE(v.size() == 7);
  CHECK(v.front() == 1e-3);
  CHECK(v.back() == 1e-1);
  CHECK(v[3] == doctest::Approx(1e-2).epsilon(1e-14));
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] / v[i - 1] == doctest::Approx(std::pow(10.0, 1.0 / 3)).epsilon(1e-12));
  CHECK_THROWS_AS(logspace(1e-3, 1e-1, 1), std::invalid_argument);
  CHECK_THROWS_AS(logspace(0.0, 1e-1, 4), std::invalid_argument);
}

TEST_CASE("log-log fit") {
  std::vector<double> x, y;
  for (int i = 0; i < 7; ++i) {
    x.push_back(std::pow(10.0, -3.0 + i / 3.0));
    y.push_back(2.5 * std::pow(x.back(), 0.5));
  }
  const SlopeFit fit = fit_loglog(x, y);
  CHECK(std::abs(fit.slope - 0.5) <= 1e-9);
  CHECK(std::exp(fit.intercept) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit.stderr_slope <= 1e-9);
  CHECK_THROWS_AS(fit_loglog({0.1, 0.1, 0.1}, {1.0, 2.0, 3.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog({0.1, -0.2}, {1.0, 2.0}), std::invalid_argument);

  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < x.size(); ++i) rows.push_back({x[i], x[i], std::sqrt(x[i]), NAN, {}});
  const ExperimentReport rep = fit_rows(rows, 1.0, 0.5);
  CHECK(std::abs(rep.slope - 0.5) <= 1e-9);
  CHECK(rep.theoretical_slope == 0.5);
}

TEST_CASE("stability constant") {
  // d = 1, q = p = 2, R = 1, M = 1; the unit ball volume in 1D is 2.
  const double c = std::pow(2.0, 16) * 8.0 * std::sqrt(2.0) * 1.0 * 3.0 * 2.0 * std::pow(2.0, 5);
  CHECK(stability_constant(1, 2.0, 2.0, 1.0, 1.0) == doctest::Approx(c).epsilon(1e-12));
  const double c2 = std::pow(2.0, 24) * 27.0 * std::pow(3.0 / 1.0, 1.0 / 3.0) * 4.0 * (1.0 + std::numbers::pi) * 3.0 *
                    std::pow(2.0, 7);
  CHECK(stability_constant(2, 3.0, 3.0, 1.0, 2.0) == doctest::Approx(c2).epsilon(1e-12));
}

TEST_CASE("example values") {
  SweepConfig cfg;
  const auto e12 = run_example("1.2", cfg);
  REQUIRE(e12.rows.size() == 1);
  CHECK(e12.rows[0].output == 2.0);
  CHECK(e12.rows[0].input == 0.0);
  CHECK(e12.passed());

  cfg.eps = {0.1, 0.01};
  const auto e13 = run_example("1.3", cfg);
  REQUIRE(e13.rows.size() == 2);
  for (const auto& row : e13.rows) {
    CHECK(std::abs(row.output - std::sqrt(2.0)) <= 1e-12);
    CHECK(std::abs(row.input - row.eps / (2.0 * std::sqrt(3.0))) <= 1e-12);
  }
  CHECK(e13.passed());

  const auto e14 = run_example("1.4", cfg);
  for (const auto& row : e14.rows) {
    CHECK(std::abs(row.output - std::sqrt(2.0 * row.eps)) <= 1e-12);
    CHECK(std::abs(row.input - std::sqrt(std::pow(row.eps, 3) / 12.0)) <= 1e-12);
  }
  CHECK_THROWS_AS(run_example("2.1", cfg), std::invalid_argument);

  const auto d = example_discrete_check(0.1, 10000);
  CHECK(std::abs(d.output - std::sqrt(2.0)) <= 1e-3);
  CHECK(std::abs(d.input - 0.1 / (2.0 * std::sqrt(3.0))) <= 1e-3);
}

TEST_CASE("rate fit") {
  SweepConfig cfg;
  cfg.eps = logspace(1e-3, 1e-1, 7);
  const auto rep = fit_holder_rate(cfg);
  CHECK(std::abs(rep.slope - 1.0 / 3.0) <= 0.02);
  CHECK(rep.passed());
  // The rate construction stays inside the stability bound.
  const double c = stability_constant(1, 2.0, 2.0, 1.0, 1.0);
  for (const auto& row : rep.rows) CHECK(row.output <= c * std::cbrt(row.input));

  cfg.r = 3.0;
  CHECK(std::abs(fit_holder_rate(cfg).slope - 3.0 / 8.0) <= 0.03);

  cfg.eps = {0.01, 0.02, 0.03};
  CHECK_THROWS_AS(fit_holder_rate(cfg), std::invalid_argument);
}

TEST_CASE("config parsing") {
  const SweepConfig j = parse_sweep_config(R"({"scenario": "rate", "eps": [0.01, 0.1], "p": 3, "seed": 9, "t": [0, 1]})");
  CHECK(j.scenario == "rate");
  CHECK(j.eps == std::vector<double>{0.01, 0.1});
  CHECK(j.p == 3.0);
  CHECK(j.seed == 9);
  CHECK(j.t_values == std::vector<double>{0.0, 1.0});

  const SweepConfig kv = parse_sweep_config(
      "# comment\nscenario = stability\neps_min = 0.001\neps_max = 0.1\neps_count = 5\nq = 3\nid = 1.3\nout = some/dir\n");
  CHECK(kv.scenario == "stability");
  CHECK(kv.eps == logspace(1e-3, 0.1, 5));
  CHECK(kv.q == 3.0);
  CHECK(kv.example_id == "1.3");
  CHECK(kv.out == std::filesystem::path("some/dir"));

  CHECK_THROWS_AS(parse_sweep_config("bogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config(R"({"eps": [0.1], "eps_min": 0.01, "eps_max": 0.1, "eps_count": 3})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_sweep_config(R"({"p": "two"})"), std::invalid_argument);
}

TEST_CASE("config validation") {
  SweepConfig c;
  c.eps = {0.6};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.eps = {0.1};
  c.scenario = "stability";
  c.p = 3.0;
  c.q = 2.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.q = 2.5;
  CHECK_NOTHROW(c.validate());
  c.r = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.r = 2.0;
  c.t_values = {0.0, 1.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  SweepConfig bad;
  bad.scenario = "stability";
  bad.p = 3.0;
  bad.q = 2.0;
  CHECK_THROWS_AS(audit_stability_bound(bad), std::invalid_argument);
}

TEST_CASE("stability audit is deterministic and clean") {
  SweepConfig cfg;
  cfg.scenario = "stability";
  cfg.instances_1d = 12;
  cfg.instances_2d = 2;
  cfg.seed = 17;
  const auto a = audit_stability_bound(cfg);
  const auto b = audit_stability_bound(cfg);
  CHECK(a.rows.size() == 14);
  CHECK(a.passed());
  CHECK(report_text(a) == report_text(b));
  for (const auto& row : a.rows) {
    CHECK(row.output <= row.bound);
    CHECK(std::isfinite(row.input));
  }
  cfg.seed = 18;
  CHECK(report_text(audit_stability_bound(cfg)) != report_text(a));
}

TEST_CASE("singularity suite") {
  SweepConfig cfg;
  const auto rep = run_singularity_suite(cfg);
  CHECK(rep.passed());
  int xi = 0, ratio = 0;
  for (const auto& row : rep.rows) {
    if (row.extra[0] == 1.0) {
      ++xi;
      CHECK(row.output == row.extra[1]);
    } else if (row.extra[0] == 2.0) {
      ++ratio;
      CHECK(std::abs(row.output - 8.0) <= 1e-6);
    }
  }
  CHECK(xi == 9);
  CHECK(ratio == 3);
}

TEST_CASE("figure 1 plumbing") {
  const auto dir = testing::scratch_dir("figure1_plumbing");
  SweepConfig cfg;
  cfg.grid = 10;
  cfg.out = dir;
  const auto rep = run_figure1(cfg);
  CHECK(rep.passed());
  const double diag = std::sqrt(2.0) / 10;
  CHECK(rep.constants.at("residual0") <= 2 * diag);
  CHECK(rep.constants.at("residual1") <= 2 * diag);
  const std::string manifest = slurp(dir / "manifest.csv");
  CHECK(std::count(manifest.begin(), manifest.end(), '\n') == 6);
  for (int k = 0; k < 5; ++k) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "mu_%02d_t", k);
    CHECK(manifest.find(stem) != std::string::npos);
  }
  std::size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.path().filename().string().rfind("mu_", 0) == 0) ++files;
  CHECK(files == 10);
}

TEST_CASE("figure 1 with identical targets is constant in t") {
  const auto dir = testing::scratch_dir("figure1_same");
  const Domain square = Domain::box(Vec::Zero(2), Vec::Ones(2));
  Rng rng(61);
  Mat pts(2, 20);
  for (Index j = 0; j < 20; ++j) pts.col(j) << rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9);
  write_point_cloud_csv(dir / "same.csv", DiscreteMeasure::uniform(square, pts));
  SweepConfig cfg;
  cfg.grid = 10;
  cfg.target0 = dir / "same.csv";
  cfg.target1 = dir / "same.csv";
  cfg.out = dir;
  const auto rep = run_figure1(cfg);
  CHECK(rep.passed());
  for (const auto& row : rep.rows) CHECK(row.output <= 1e-12);
  const std::string first = slurp(dir / "mu_00_t0.csv");
  CHECK(slurp(dir / "mu_02_t0.5.csv") == first);
  CHECK(slurp(dir / "mu_04_t1.csv") == first);
}

TEST_CASE("figure 1 rejects malformed targets") {
  const auto dir = testing::scratch_dir("figure1_bad");
  {
    std::ofstream os(dir / "bad.csv");
    os << "x1,x2,weight\n0.5,oops,1\n";
  }
  SweepConfig cfg;
  cfg.grid = 4;
  cfg.target0 = dir / "bad.csv";
  CHECK_THROWS(run_figure1(cfg));
  cfg.target0 = dir / "missing.csv";
  CHECK_THROWS(run_figure1(cfg));
}
