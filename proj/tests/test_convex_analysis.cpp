#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "pushstab/hull.hpp"
#include "pushstab/max_affine.hpp"
#include "pushstab/potential.hpp"
#include "pushstab/singular_sets.hpp"
#include "support.hpp"

using namespace pushstab;

namespace {

const Domain kLine = Domain::interval(-1.0, 1.0);
const Domain kDisk = Domain::ball(2, 1.0);

Vec v1(double x) { return Vec::Constant(1, x); }

Vec v2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

// Slopes of pieces that attain the max at some sample of [x - eta, x + eta].
double sampled_diam_1d(const MaxAffineFunction& f, double x, double eta, int steps) {
  double lo = INFINITY, hi = -INFINITY;
  for (int k = 0; k <= steps; ++k) {
    const double s = x - eta + 2.0 * eta * k / steps;
    const Vec vals = f.piece_values(v1(s));
    Index arg = 0;
    vals.maxCoeff(&arg);
    lo = std::min(lo, f.slopes()(0, arg));
    hi = std::max(hi, f.slopes()(0, arg));
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("subdifferential examples") {
  const MaxAffineFunction absf = MaxAffineFunction::abs();
  const SubdiffPolytope at0 = subdifferential(absf, v1(0.0));
  REQUIRE(at0.vertices.cols() == 2);
  CHECK(at0.vertices(0, 0) == -1.0);
  CHECK(at0.vertices(0, 1) == 1.0);
  const SubdiffPolytope at_half = subdifferential(absf, v1(0.5));
  REQUIRE(at_half.vertices.cols() == 1);
  CHECK(at_half.vertices(0, 0) == 1.0);
  CHECK(at_half.is_singleton());

  const int n = 4;
  const MaxAffineFunction xi = xi_function(n, 1.0, 1.0);
  const auto pts = xi_singular_points(n, 1.0);
  REQUIRE(pts.size() == 4);
  for (int i = 1; i <= n; ++i) {
    CHECK(pts[i - 1] == doctest::Approx(2.0 * i / (n + 1) - 1.0));
    const SubdiffPolytope s = subdifferential(xi, v1(pts[i - 1]));
    REQUIRE(s.vertices.cols() == 2);
    // Subdifferential at x_i is [(2(i-1)/N - 1) L, (2i/N - 1) L] with 1-based i.
    CHECK(s.vertices(0, 0) == doctest::Approx(2.0 * (i - 1) / n - 1.0));
    CHECK(s.vertices(0, 1) == doctest::Approx(2.0 * i / n - 1.0));
  }
}

TEST_CASE("ball diameter examples") {
  const MaxAffineFunction absf = MaxAffineFunction::abs();
  CHECK(diam_subdiff_ball(absf, v1(0.0), 0.1) == 2.0);
  CHECK(diam_subdiff_ball(absf, v1(2.0), 1.0) == 0.0);
  // The ball reaching a kink exactly counts it.
  CHECK(diam_subdiff_ball(absf, v1(1.0), 1.0) == 2.0);
}

TEST_CASE("ball diameter against dense sampling in 1D") {
  Rng rng(31);
  for (int t = 0; t < 40; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kLine, 3 + static_cast<int>(rng.index(8)), 2.0);
    const double x = rng.uniform(-1.0, 1.0);
    const double eta = rng.uniform(0.01, 0.3);
    const double exact = diam_subdiff_ball(f, v1(x), eta);
    // Samples inside the ball only see active pieces; a slightly larger ball sees them all.
    CHECK(sampled_diam_1d(f, x, eta, 20000) <= exact + 1e-12);
    CHECK(exact <= sampled_diam_1d(f, x, eta * (1.0 + 1e-3), 20000) + 1e-12);
  }
}

TEST_CASE("ball diameter in 2D against sampling of the disk") {
  Rng rng(32);
  for (int t = 0; t < 15; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 8, 2.0);
    const Vec x = rng.in_ball(Vec::Zero(2), 1.0);
    const double eta = rng.uniform(0.05, 0.3);
    const BallActivity act(f);
    const auto exact = act.active(x, eta);
    // Every piece seen as argmax at a sample is reported active.
    for (int k = 0; k < 3000; ++k) {
      const Vec s = rng.in_ball(x, eta);
      Index arg = 0;
      f.piece_values(s).maxCoeff(&arg);
      CHECK(std::find(exact.begin(), exact.end(), arg) != exact.end());
    }
    CHECK(act.diameter(x, eta) <= 2.0 * f.lipschitz() + 1e-12);
  }
}

TEST_CASE("covering number examples") {
  const int n = 4;
  const double eta = 0.02;  // below R / (8 (N + 1))
  const MaxAffineFunction xi = xi_function(n, 1.0, 1.0);
  const SingularSetReport rep = covering_number_sigma(xi, eta, 2.0 / n, 1.0);
  CHECK(rep.count == 4);
  CHECK(rep.count <= rep.theorem_bound);
  for (double x : xi_singular_points(n, 1.0)) {
    // Sigma_alpha is found at every eta: some center sits within the covering radius.
    bool hit = false;
    for (Index c = 0; c < rep.count; ++c) hit = hit || std::abs(rep.centers(0, c) - x) <= 8.0 * eta + eta / 4;
    CHECK(hit);
  }
  for (Index c = 0; c < rep.count; ++c) CHECK(diam_subdiff_ball(xi, rep.centers.col(c), eta) >= 2.0 / n - 1e-9);

  CHECK(covering_number_sigma(MaxAffineFunction::affine(v1(0.7), 0.1), 0.05, 0.1, 1.0).count == 0);
  // alpha above 2 Lip: empty by construction.
  CHECK(covering_number_sigma(MaxAffineFunction::abs(), 0.05, 2.5, 1.0).count == 0);
}

TEST_CASE("covering number respects the bound on random instances") {
  Rng rng(33);
  for (int t = 0; t < 4; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 10, 1.5);
    const double eta = 0.08, alpha = 0.5, r = 1.0;
    const SingularSetReport rep = covering_number_sigma(f, eta, alpha, r);
    const double bound = 48.0 * 4.0 * (r + 4.0 * eta) * f.lipschitz() / (alpha * eta);
    CHECK(rep.theorem_bound == doctest::Approx(bound).epsilon(1e-12));
    CHECK(static_cast<double>(rep.count) <= bound);
    for (Index c = 0; c < rep.count; ++c) {
      CHECK(rep.centers.col(c).norm() <= r + 1e-12);
      CHECK(diam_subdiff_ball(f, rep.centers.col(c), eta) >= alpha - 1e-9);
    }
  }
  for (int t = 0; t < 10; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kLine, 6, 2.0);
    const SingularSetReport rep = covering_number_sigma(f, 0.03, 0.3, 1.0);
    CHECK(static_cast<double>(rep.count) <= 48.0 * f.lipschitz() / 0.3);
  }
}

TEST_CASE("integral examples") {
  const auto absint = integral_diam_estimate(MaxAffineFunction::abs(), 0.05, 2.0, 1.0);
  CHECK(absint.estimate == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(absint.estimate <= absint.bound);
  CHECK(absint.method == "exact-1d");
  CHECK(integral_diam_estimate(MaxAffineFunction::affine(v1(0.3), 1.0), 0.05, 2.0, 1.0).estimate == 0.0);
  CHECK(integral_diam_estimate(MaxAffineFunction::affine(v2(0.3, 1.0), 1.0), 0.05, 2.0, 1.0).estimate == 0.0);
  CHECK_THROWS_AS(integral_diam_estimate(MaxAffineFunction::abs(), 0.05, 1.0, 1.0), std::invalid_argument);

  for (int n : {2, 4, 8}) {
    for (double q : {1.5, 2.0, 3.0}) {
      const double lip = 2.0, eta = 0.5 / (n + 1);
      const auto est = integral_diam_estimate(xi_function(n, lip, 1.0), eta, q, 1.0);
      CHECK(est.estimate == doctest::Approx(n * 2.0 * eta * std::pow(2.0 * lip / n, q)).epsilon(1e-10));
      CHECK(est.estimate <= est.bound);
    }
  }
}

TEST_CASE("integral constant") {
  for (int d : {1, 2, 3}) {
    const double c = 48.0 * d * d * unit_ball_volume(d) * std::pow(2.0, 3 * d + 2.0 - 1) * 2.0 * std::pow(1.4, d - 1);
    CHECK(integral_constant(d, 2.0, 1.0, 0.1) == doctest::Approx(c).epsilon(1e-12));
    CHECK(covering_constant(d, 1.0, 0.1) == doctest::Approx(48.0 * d * d * std::pow(1.4, d - 1)).epsilon(1e-12));
  }
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
}

TEST_CASE("L1 lemma") {
  const LemmaCheck c = verify_lemma_diam_l1(MaxAffineFunction::abs(), v1(0.0), 1.0);
  CHECK(c.lhs == 2.0);
  CHECK(c.rhs == doctest::Approx(48.0).epsilon(1e-9));
  const LemmaCheck a = verify_lemma_diam_l1(MaxAffineFunction::affine(v2(0.2, -0.1), 0.0), v2(0.1, 0.1), 0.2);
  CHECK(a.lhs == 0.0);
  CHECK(a.lhs <= a.rhs);

  Rng rng(34);
  for (int t = 0; t < 100; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 2 + static_cast<int>(rng.index(8)), 2.0);
    const Vec x = rng.in_ball(Vec::Zero(2), 1.0);
    const LemmaCheck r = verify_lemma_diam_l1(f, x, rng.uniform(0.02, 0.2));
    CHECK(r.lhs <= r.rhs * (1.0 + 1e-6));
  }
}

TEST_CASE("Lipschitz extension") {
  Rng rng(35);
  const MaxAffineFunction f = random_max_affine(rng, kDisk, 6, 1.0);
  const MaxAffineFunction g = lipschitz_extension(f);
  CHECK(g.slopes() == f.slopes());
  CHECK(g.intercepts() == f.intercepts());
  CHECK(lipschitz_extension(MaxAffineFunction::abs())(v1(-3.0)) == 3.0);

  // Composite convex side of a p = 3 potential, sampled on a grid.
  const PCost cost(3.0, 1.0);
  Mat targets(2, 4);
  targets << 0.3, -0.4, 0.1, 0.0, 0.2, 0.1, -0.5, 0.6;
  Vec psi(4);
  psi << 0.0, 0.05, -0.02, 0.01;
  const CConcavePotential pot = CConcavePotential::c_bar_transform(cost, kDisk, targets, psi);
  const ConvexSide& side = pot.convex_side();
  std::vector<Vec> grid;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const Vec x = v2(-1.0 + 0.1 * i, -1.0 + 0.1 * j);
      if (x.norm() <= 1.0) grid.push_back(x);
    }
  Mat samples(2, static_cast<Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) samples.col(static_cast<Index>(k)) = grid[k];
  const MaxAffineFunction ext = lipschitz_extension(side.value, [&](const Vec& x) -> Vec { return side.subdifferential(x).col(0); },
                                                    samples);
  for (const Vec& x : grid) CHECK(std::abs(ext(x) - side.value(x)) <= 1e-9);
  CHECK(ext.lipschitz() <= side.lipschitz + 1e-9);
}

TEST_CASE("subdifferential monotonicity") {
  Rng rng(36);
  for (int t = 0; t < 30; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 7, 2.0);
    for (int k = 0; k < 30; ++k) {
      const Vec x = rng.in_ball(Vec::Zero(2), 1.0), y = rng.in_ball(Vec::Zero(2), 1.0);
      const Mat gx = subdifferential(f, x).vertices, gy = subdifferential(f, y).vertices;
      for (Index i = 0; i < gx.cols(); ++i)
        for (Index j = 0; j < gy.cols(); ++j) CHECK((gx.col(i) - gy.col(j)).dot(x - y) >= -1e-12);
    }
  }
}

TEST_CASE("ball diameter grows with eta and obeys the oscillation bound") {
  Rng rng(37);
  for (int t = 0; t < 30; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kLine, 6, 2.0);
    const double x = rng.uniform(-1.0, 1.0);
    double prev = 0.0;
    for (double eta : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5}) {
      const double d = diam_subdiff_ball(f, v1(x), eta);
      CHECK(d >= prev);
      prev = d;
      double lo = INFINITY, hi = -INFINITY;
      for (int k = 0; k <= 4000; ++k) {
        const double v = f(v1(x - 2.0 * eta + 4.0 * eta * k / 4000));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      CHECK(d <= 2.0 / eta * (hi - lo) + 1e-9);
    }
  }
}

TEST_CASE("min-norm point") {
  Mat seg(2, 2);
  seg << -1.0, 2.0, 1.0, 1.0;
  CHECK(min_norm_point(seg).isApprox(v2(0.0, 1.0)));
  Rng rng(38);
  for (int t = 0; t < 100; ++t) {
    const Mat s = testing::random_points(rng, 3, 2);
    // Projection of 0 onto the segment [a, b].
    const Vec a = s.col(0), b = s.col(1);
    const double lam = std::clamp(-a.dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
    CHECK((min_norm_point(s) - (a + lam * (b - a))).norm() <= 1e-10);
    CHECK(in_hull(s, 0.5 * (a + b)));
  }
  Mat tri(2, 3);
  tri << -1.0, 1.0, 0.0, -1.0, -1.0, 1.0;
  CHECK(min_norm_point(tri).norm() <= 1e-12);
  CHECK(hull_distance(tri, v2(0.0, 2.0)) == doctest::Approx(1.0));
  CHECK(point_set_diameter(tri) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("max-affine CSV round trip") {
  Rng rng(39);
  const MaxAffineFunction f = random_max_affine(rng, kDisk, 5, 1.0);
  const auto path = testing::scratch_dir("max_affine") / "f.csv";
  {
    std::ofstream os(path);
    write_max_affine_csv(os, f);
  }
  const MaxAffineFunction g = read_max_affine_csv(path);
  CHECK(g.slopes() == f.slopes());
  CHECK(g.intercepts() == f.intercepts());
}

TEST_CASE("singular report CSV") {
  const SingularSetReport rep = covering_number_sigma(xi_function(4, 1.0, 1.0), 0.02, 0.5, 1.0);
  std::ostringstream os;
  write_singular_report_csv(os, rep);
  const std::string s = os.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 6);
  CHECK(s.find("# ") != std::string::npos);
}
