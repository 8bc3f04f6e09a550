#include <cmath>

#include "doctest.h"
#include "pushstab/hull.hpp"
#include "pushstab/pushforward.hpp"
#include "support.hpp"

using namespace pushstab;

namespace {

const Domain kLine = Domain::interval(-1.0, 1.0);
const Domain kDisk = Domain::ball(2, 1.0);
const Domain kSquare = Domain::box(Vec::Zero(2), Vec::Ones(2));

Vec v1(double x) { return Vec::Constant(1, x); }

GridDensity centered_grid(int cells) { return GridDensity::uniform(kLine, Box{v1(-0.5), v1(0.5)}, {cells}); }

// Mass of the image at y, or 0.
double mass_at(const DiscreteMeasure& m, const Vec& y) {
  double s = 0.0;
  for (Index i = 0; i < m.size(); ++i)
    if ((m.point(i) - y).norm() <= 1e-12) s += m.weight(i);
  return s;
}

void check_conservation(const PushforwardResult& r, const DiscreteMeasure& rho) {
  CHECK(std::abs(r.image.weights().sum() - 1.0) <= 1e-12);
  CHECK((r.coupling.source_marginal() - rho.weights()).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((r.coupling.target_marginal() - r.image.weights()).cwiseAbs().maxCoeff() <= 1e-12);
}

}  // namespace

TEST_CASE("gradient pushforward examples") {
  const auto grid = pushforward_convex(MaxAffineFunction::abs(), centered_grid(1000));
  REQUIRE(grid.image.size() == 2);
  CHECK(grid.image.point(0)[0] == -1.0);
  CHECK(grid.image.point(1)[0] == 1.0);
  CHECK(grid.image.weight(0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(grid.singular_hits == 0);

  const auto dirac = pushforward_convex(MaxAffineFunction::abs(), DiscreteMeasure::dirac(kLine, v1(0.0)),
                                        SelectionPolicy::fixed_index(1));
  REQUIRE(dirac.image.size() == 1);
  CHECK(dirac.image.point(0)[0] == 1.0);
  CHECK(dirac.singular_hits == 1);
  REQUIRE(dirac.coupling.entries().size() == 1);
  CHECK(dirac.coupling.entries()[0].mass == 1.0);

  Rng rng(51);
  Vec a(2);
  a << 0.3, -0.4;
  const DiscreteMeasure rho = testing::random_weighted(rng, kDisk, 12);
  const auto aff = pushforward_convex(MaxAffineFunction::affine(a, 0.2), rho);
  REQUIRE(aff.image.size() == 1);
  CHECK(aff.image.point(0) == a);
}

TEST_CASE("transport map pushforward examples") {
  for (double p : {2.0, 3.0, 4.0}) {
    const auto r = pushforward_tmap(CConcavePotential::tightness(p), centered_grid(1000));
    // For p != 2 the closed form lands within an ulp of +-1, so atoms are compared to 1e-12.
    for (Index i = 0; i < r.image.size(); ++i) CHECK(std::abs(std::abs(r.image.point(i)[0]) - 1.0) <= 1e-12);
    CHECK(mass_at(r.image, v1(-1.0)) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(mass_at(r.image, v1(1.0)) == doctest::Approx(0.5).epsilon(1e-14));

    // Plan with an atom at the kink, sent to +1.
    const double eps = 0.1;
    const DiscreteMeasure cont = discretize(centered_grid(1000));
    Mat pts(1, cont.size() + 1);
    pts << cont.points(), 0.0;
    Vec w(cont.size() + 1);
    w << (1.0 - eps) * cont.weights(), eps;
    const DiscreteMeasure rho(kLine, pts, w);
    const auto g = pushforward_tmap(CConcavePotential::tightness(p), rho, SelectionPolicy::fixed_index(1));
    CHECK(g.singular_hits == 1);
    CHECK(mass_at(g.image, v1(-1.0)) == doctest::Approx((1.0 - eps) / 2).epsilon(1e-12));
    CHECK(mass_at(g.image, v1(1.0)) == doctest::Approx((1.0 + eps) / 2).epsilon(1e-12));
    check_conservation(g, rho);
  }

  Rng rng(52);
  const DiscreteMeasure rho = testing::random_weighted(rng, kDisk, 15);
  const auto id = pushforward_tmap(CConcavePotential::zero(PCost(2.0, 1.0), kDisk), rho);
  CHECK(wasserstein(id.image, rho, 2.0) <= 1e-12);
}

TEST_CASE("selection policies") {
  const SubdiffPolytope s = subdifferential(MaxAffineFunction::abs(), v1(0.0));
  CHECK(SelectionPolicy::min_norm().select(s, 0).norm() <= 1e-12);
  CHECK(SelectionPolicy::max_first_coordinate().select(s, 0)[0] == 1.0);
  CHECK(SelectionPolicy::fixed_index(0).select(s, 0)[0] == -1.0);
  // Out-of-range indices clamp to the last vertex.
  CHECK(SelectionPolicy::fixed_index(9).select(s, 0)[0] == 1.0);

  Mat user(1, 2);
  user << 0.25, 3.0;
  const SelectionPolicy pol = SelectionPolicy::user_vectors(user);
  CHECK(pol.select(s, 0)[0] == 0.25);
  CHECK_THROWS_AS(pol.select(s, 1), std::domain_error);
  CHECK_THROWS_AS(pushforward_convex(MaxAffineFunction::abs(), DiscreteMeasure::dirac(kLine, v1(0.0)),
                                     SelectionPolicy::user_vectors(Mat::Constant(1, 1, 2.0))),
                  std::domain_error);
  CHECK_FALSE(SelectionPolicy::min_norm().describe().empty());
}

TEST_CASE("coupling support lies in the subdifferential") {
  Rng rng(53);
  for (int t = 0; t < 20; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 6, 1.0);
    Mat pts(2, 20);
    for (Index i = 0; i < 20; ++i) pts.col(i) = rng.in_ball(Vec::Zero(2), 1.0);
    const DiscreteMeasure rho = DiscreteMeasure::uniform(kDisk, pts);
    for (const SelectionPolicy& pol : {SelectionPolicy::min_norm(), SelectionPolicy::max_first_coordinate()}) {
      const auto r = pushforward_convex(f, rho, pol);
      check_conservation(r, rho);
      for (const auto& e : r.coupling.entries())
        CHECK(hull_distance(subdifferential(f, rho.point(e.i)).vertices, r.image.point(e.j)) <= 1e-8);
    }
  }
  // Exact ties: the point 0 for |x|.
  Mat pts(1, 3);
  pts << -0.5, 0.0, 0.5;
  const auto r = pushforward_convex(MaxAffineFunction::abs(), DiscreteMeasure::uniform(kLine, pts));
  CHECK(r.singular_hits == 1);
  CHECK(mass_at(r.image, v1(0.0)) == doctest::Approx(1.0 / 3));
}

TEST_CASE("policies agree away from singular points") {
  Rng rng(54);
  for (int t = 0; t < 20; ++t) {
    const MaxAffineFunction f = random_max_affine(rng, kDisk, 6, 1.0);
    const DiscreteMeasure rho = testing::random_weighted(rng, kDisk, 25);
    const auto a = pushforward_convex(f, rho, SelectionPolicy::min_norm());
    const auto b = pushforward_convex(f, rho, SelectionPolicy::fixed_index(0));
    REQUIRE(a.singular_hits == 0);
    CHECK(a.image.points() == b.image.points());
    CHECK(a.image.weights() == b.image.weights());
  }
}

TEST_CASE("regular potentials contract W2 by their Lipschitz factor") {
  Rng rng(55);
  for (double c : {0.25, 0.5, 0.9}) {
    // phi = (1 - c)|x|^2: convex side 2c x, map x -> c x.
    const auto pot = CConcavePotential::closed_form(
        PCost(2.0, 1.0), kDisk, [c](const Vec& x) { return (1.0 - c) * x.squaredNorm(); },
        [c](const Vec& x) -> Mat { return 2.0 * c * x; }, true, "scaled");
    for (int t = 0; t < 10; ++t) {
      const DiscreteMeasure a = testing::random_weighted(rng, kDisk, 8);
      const DiscreteMeasure b = testing::random_weighted(rng, kDisk, 9);
      const auto ia = pushforward_tmap(pot, a), ib = pushforward_tmap(pot, b);
      const double w = wasserstein(a, b, 2.0);
      CHECK(std::abs(wasserstein(ia.image, ib.image, 2.0) - c * w) <= 1e-10 * (1.0 + w));
    }
  }
}

TEST_CASE("1D Laguerre cells match the analytic boundary") {
  Rng rng(56);
  for (double p : {2.0, 3.0}) {
    for (int t = 0; t < 20; ++t) {
      Mat y(1, 2);
      y << rng.uniform(-0.8, -0.1), rng.uniform(0.1, 0.8);
      Vec psi(2);
      psi << rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05);
      const auto pot = CConcavePotential::c_bar_transform(PCost(p, 1.0), kLine, y, psi);
      // Root of |x - y0|^p - psi0 - |x - y1|^p + psi1 between the targets.
      auto gap = [&](double x) {
        return std::pow(std::abs(x - y(0, 0)), p) - psi[0] - std::pow(std::abs(x - y(0, 1)), p) + psi[1];
      };
      double lo = -1.0, hi = 1.0;
      if (gap(lo) > 0.0 || gap(hi) < 0.0) continue;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) > 0.0 ? hi : lo) = mid;
      }
      const Vec m = laguerre_masses(pot, Measure1D::uniform(kLine, -1.0, 1.0));
      CHECK(m[0] == doctest::Approx((lo + 1.0) / 2).epsilon(1e-10));
      CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-14));
      if (p == 2.0) {
        const double x = (y(0, 1) * y(0, 1) - y(0, 0) * y(0, 0) + psi[0] - psi[1]) / (2 * (y(0, 1) - y(0, 0)));
        CHECK(lo == doctest::Approx(x).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("2D Laguerre quadrature against the discrete map") {
  Rng rng(57);
  Mat y(2, 4);
  for (int j = 0; j < 4; ++j) y.col(j) = rng.in_ball(Vec::Zero(2), 0.5);
  const auto pot = CConcavePotential::c_bar_transform(PCost(2.0, 1.0), kDisk, y, Vec::Zero(4));
  const GridDensity g = GridDensity::uniform(kDisk, Box{Vec::Constant(2, -0.7), Vec::Constant(2, 0.7)}, {8, 8});
  const LaguerreQuadrature q = laguerre_masses(pot, g, 16);
  CHECK(q.masses.sum() == doctest::Approx(1.0).epsilon(1e-12));
  // Coarse cell centers give the masses up to the straddling sub-cells.
  const auto push = pushforward_tmap(pot, discretize(GridDensity::uniform(kDisk, Box{Vec::Constant(2, -0.7), Vec::Constant(2, 0.7)}, {128, 128})));
  for (int j = 0; j < 4; ++j) CHECK(std::abs(mass_at(push.image, y.col(j)) - q.masses[j]) <= q.straddle_mass + 1e-12);
}

TEST_CASE("Brenier potential from the discrete plan") {
  const Domain unit = Domain::interval(0.0, 1.0);
  const DiscreteMeasure rho = discretize(GridDensity::uniform(unit, {100}));
  Mat pts(1, 2);
  pts << 0.0, 1.0;
  const DiscreteMeasure mu = DiscreteMeasure::uniform(unit, pts);
  const BrenierPotential u = potential_from_discrete_ot(rho, mu);
  CHECK(u.refined);
  CHECK(u.margin > 0.0);
  const auto r = pushforward_convex(u.potential, rho, SelectionPolicy::min_norm(), unit);
  for (const auto& e : r.coupling.entries()) CHECK(r.image.point(e.j)[0] == (rho.point(e.i)[0] < 0.5 ? 0.0 : 1.0));

  const DiscreteMeasure dirac = DiscreteMeasure::dirac(unit, v1(0.3));
  const auto d = pushforward_convex(potential_from_discrete_ot(rho, dirac).potential, rho, SelectionPolicy::min_norm(), unit);
  REQUIRE(d.image.size() == 1);
  CHECK(d.image.point(0)[0] == doctest::Approx(0.3).epsilon(1e-15));
}

TEST_CASE("Brenier potential round trip") {
  Rng rng(58);
  const DiscreteMeasure rho = discretize(GridDensity::uniform(kSquare, {10, 10}));
  for (int t = 0; t < 10; ++t) {
    Mat pts(2, 20);
    for (Index j = 0; j < 20; ++j) pts.col(j) << rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95);
    const DiscreteMeasure mu = DiscreteMeasure::uniform(kSquare, pts);
    const BrenierPotential u = potential_from_discrete_ot(rho, mu);
    CHECK(u.split_atoms == 0);
    const auto r = pushforward_convex(u.potential, rho, SelectionPolicy::min_norm(), kSquare);
    CHECK(wasserstein(r.image, mu, 2.0) <= 1e-8);
    CHECK(r.singular_hits == 0);
  }
}

TEST_CASE("LOT interpolant") {
  Rng rng(59);
  const GridDensity g = GridDensity::uniform(kSquare, {12, 12});
  const DiscreteMeasure rho = discretize(g);
  Mat p0(2, 16), p1(2, 16);
  for (Index j = 0; j < 16; ++j) {
    p0.col(j) << rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9);
    p1.col(j) << rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9);
  }
  const auto u0 = potential_from_discrete_ot(rho, DiscreteMeasure::uniform(kSquare, p0)).potential;
  const auto u1 = potential_from_discrete_ot(rho, DiscreteMeasure::uniform(kSquare, p1)).potential;

  const auto at0 = lot_interpolant(u0, u1, 0.0, g, SelectionPolicy::min_norm(), kSquare);
  const auto direct = pushforward_convex(u0, g, SelectionPolicy::min_norm(), kSquare);
  CHECK(at0.image.points() == direct.image.points());
  CHECK(at0.image.weights() == direct.image.weights());

  const auto same0 = lot_interpolant(u0, u0, 0.3, g, SelectionPolicy::min_norm(), kSquare);
  const auto same1 = lot_interpolant(u0, u0, 0.8, g, SelectionPolicy::min_norm(), kSquare);
  CHECK(wasserstein(same0.image, same1.image, 2.0) <= 1e-12);

  for (double t : {0.25, 0.5, 0.75}) {
    const auto r = lot_interpolant(u0, u1, t, rho, SelectionPolicy::min_norm(), kSquare);
    check_conservation(r, rho);
  }
  CHECK_THROWS_AS(lot_interpolant(u0, u1, 1.5, g), std::invalid_argument);
}
