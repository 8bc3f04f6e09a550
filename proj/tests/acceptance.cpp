// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <string>

#include "pushstab/experiments.hpp"
#include "pushstab/pcost.hpp"
#include "pushstab/singular_sets.hpp"
#include "pushstab/transport.hpp"
#include "support.hpp"

using namespace pushstab;

namespace {

int failures = 0;

// Runs `body`, which fills `detail` and returns success; a runtime limit of
// zero means none.
void criterion(int id, const char* title, double limit_s, const std::function<bool(std::string&)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail += std::string(" exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0.0 && secs >= limit_s) {
    ok = false;
    detail += " (over the time limit)";
  }
  if (!ok) ++failures;
  std::printf("%s %2d %s: %s [%.2f s%s]\n", ok ? "PASS" : "FAIL", id, title, detail.c_str(), secs,
              limit_s > 0.0 ? (" / " + std::to_string(static_cast<int>(limit_s)) + " s").c_str() : "");
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

}  // namespace

int main() {
  criterion(1, "example 1.2 exact", 1.0, [](std::string& d) {
    const auto rep = run_example("1.2", SweepConfig{});
    const auto& row = rep.rows.at(0);
    d = fmt("output %.17g input %.17g", row.output, row.input);
    return row.output == 2.0 && row.input == 0.0;
  });

  criterion(2, "example 1.3 exact", 10.0, [](std::string& d) {
    SweepConfig cfg;
    cfg.eps = {0.1, 0.01};
    const auto rep = run_example("1.3", cfg);
    bool ok = rep.rows.size() == 2;
    for (const auto& row : rep.rows) {
      const double in = row.eps / (2.0 * std::sqrt(3.0));
      const auto disc = example_discrete_check(row.eps, 10000);
      const bool closed = std::abs(row.output - std::sqrt(2.0)) <= 1e-12 && std::abs(row.input - in) <= 1e-12;
      const bool discrete = std::abs(disc.output - std::sqrt(2.0)) <= 1e-3 && std::abs(disc.input - in) <= 1e-3;
      d += fmt("eps %g: closed-form err %.2e, discrete err %.2e; ", row.eps,
               std::max(std::abs(row.output - std::sqrt(2.0)), std::abs(row.input - in)),
               std::max(std::abs(disc.output - std::sqrt(2.0)), std::abs(disc.input - in)));
      ok = ok && closed && discrete;
    }
    return ok;
  });

  criterion(3, "example 1.4 rate", 30.0, [](std::string& d) {
    SweepConfig cfg;
    cfg.eps = logspace(1e-3, 1e-1, 7);
    const double s2 = fit_holder_rate(cfg).slope;
    cfg.r = 3.0;
    const double s3 = fit_holder_rate(cfg).slope;
    d = fmt("slope %.6f (1/3 +- 0.02), r=3 slope %.6f (3/8 +- 0.03)", s2, s3);
    return std::abs(s2 - 1.0 / 3.0) <= 0.02 && std::abs(s3 - 3.0 / 8.0) <= 0.03;
  });

  criterion(4, "tightness covering count", 10.0, [](std::string& d) {
    bool ok = true;
    for (int n : {2, 4, 8, 16})
      for (double lip : {1.0, 3.0}) {
        const double eta = 0.9 / (8.0 * (n + 1));
        const auto rep = covering_number_sigma(xi_function(n, lip, 1.0), eta, 2.0 * lip / n, 1.0);
        if (rep.count != n) {
          ok = false;
          d += fmt("N=%g L=%g count %g; ", n, lip, static_cast<double>(rep.count));
        }
      }
    if (ok) d = "count = N for all 8 (N, L)";
    return ok;
  });

  // Criteria 5 and 6 share the singularity suite.
  ExperimentReport suite;
  double suite_secs = 0.0;
  {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      suite = run_singularity_suite(SweepConfig{});
    } catch (const std::exception& e) {
      std::printf("singularity suite threw: %s\n", e.what());
    }
    suite_secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  auto rows_of = [&](double kind) {
    std::vector<ReportRow> out;
    for (const auto& row : suite.rows)
      if (row.extra.at(0) == kind) out.push_back(row);
    return out;
  };

  criterion(5, "integral scaling", 0.0, [&](std::string& d) {
    const auto ratio = rows_of(2), one = rows_of(3), two = rows_of(4);
    bool ok = ratio.size() == 3 && one.size() == 100 && two.size() == 20;
    double worst = 0.0;
    for (const auto& row : ratio) worst = std::max(worst, std::abs(row.output - 8.0));
    int bad = 0;
    for (const auto* set : {&one, &two})
      for (const auto& row : *set) bad += !(row.output <= row.bound);
    d = fmt("|.| ratio max err %.2e, %g violations over 100 1D + 20 2D", worst, bad);
    d += fmt(", suite %.2f s of 120 s", suite_secs);
    return ok && worst <= 1e-6 && bad == 0 && suite_secs < 120.0;
  });

  criterion(6, "diameter L1 lemma", 0.0, [&](std::string& d) {
    const auto lemma = rows_of(5);
    int bad = 0;
    for (const auto& row : lemma) bad += !(row.output <= row.bound);
    d = fmt("%g violations over %g 2D instances", bad, static_cast<double>(lemma.size()));
    return lemma.size() == 100 && bad == 0;
  });

  criterion(7, "inverse gradient round trip and Holder", 0.0, [](std::string& d) {
    Rng rng(20240701);
    double worst = 0.0;
    int bad = 0;
    for (double p : {2.0, 2.5, 3.0, 4.0}) {
      const PCost cost(p, 1.0);
      for (int k = 0; k < 10000; ++k) {
        const Vec z = rng.in_ball(Vec::Zero(2), 1.0);
        if (z.norm() == 0.0) continue;
        worst = std::max(worst, (grad_xi_p(grad_xi_p_inverse(z, p), p) - z).norm() / z.norm());
      }
      for (int k = 0; k < 10000; ++k) {
        const Vec x = rng.in_ball(Vec::Zero(2), 1.0), y = rng.in_ball(Vec::Zero(2), 1.0);
        const double lhs = (grad_xi_p_inverse(y, p) - grad_xi_p_inverse(x, p)).norm();
        bad += !(lhs <= cost.holder_constant() * std::pow((y - x).norm(), cost.holder_exponent()));
      }
    }
    d = fmt("max relative round-trip error %.2e, %g Holder violations", worst, bad);
    return worst <= 1e-10 && bad == 0;
  });

  criterion(8, "stability audit", 300.0, [](std::string& d) {
    // (p, q) = (3, 2) is outside the hypothesis q > p - 1 and is not run.
    bool ok = true;
    for (auto [p, q] : {std::pair{2.0, 2.0}, {2.0, 3.0}, {3.0, 3.0}}) {
      SweepConfig cfg;
      cfg.scenario = "stability";
      cfg.p = p;
      cfg.q = q;
      cfg.r = 2.0;
      try {
        const auto rep = audit_stability_bound(cfg);
        d += fmt("(p,q,r)=(%g,%g,2): %g rows ", p, q, static_cast<double>(rep.rows.size()));
        d += fmt("%g violations; ", static_cast<double>(rep.violations));
        ok = ok && rep.passed() && rep.rows.size() == 250;
      } catch (const BoundViolation& e) {
        d += fmt("(p,q,r)=(%g,%g,2): ", p, q) + e.what() + "; ";
        ok = false;
      }
    }
    d += "(3,2,2) skipped: q <= p - 1";
    return ok;
  });

  criterion(9, "discrete OT exactness", 0.0, [](std::string& d) {
    Rng rng(90210);
    const Domain disk = Domain::ball(2, 1.0);
    double worst = 0.0;
    for (int t = 0; t < 200; ++t) {
      const Index n = 1 + static_cast<Index>(rng.index(7));
      const auto a = testing::random_uniform(rng, disk, n), b = testing::random_uniform(rng, disk, n);
      const double oracle = testing::permutation_oracle(a.points(), b.points(), 2.0);
      worst = std::max(worst, std::abs(solve_transport(a, b, 2.0).value - oracle));
    }
    d = fmt("max |solver - oracle| %.2e over 200 instances", worst);
    return worst <= 1e-10;
  });

  criterion(10, "figure 1 interpolation", 180.0, [](std::string& d) {
    const auto dir = std::filesystem::temp_directory_path() / "pushstab_acceptance_figure1";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    SweepConfig cfg;
    cfg.grid = 70;
    cfg.out = dir;
    const auto rep = run_figure1(cfg);
    const double diag = std::sqrt(2.0) / 70;
    const double r0 = rep.constants.at("residual0"), r1 = rep.constants.at("residual1");
    int files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      files += name.rfind("mu_", 0) == 0 && e.path().extension() == ".csv";
    }
    d = fmt("residuals %.4f %.4f (limit %.4f)", r0, r1, 2 * diag);
    d += fmt(", %g point-cloud files, manifest ", files) + (std::filesystem::exists(dir / "manifest.csv") ? "yes" : "no");
    return r0 <= 2 * diag && r1 <= 2 * diag && files == 5 && std::filesystem::exists(dir / "manifest.csv") &&
           rep.passed();
  });

  return failures == 0 ? 0 : 1;
}
