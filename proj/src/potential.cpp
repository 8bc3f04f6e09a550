#include "pushstab/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pushstab/hull.hpp"
#include "pushstab/transport.hpp"

namespace pushstab {

namespace {

Mat single_vertex(const Vec& g) { return Mat(g); }

// Distinct columns in lexicographic order.
Mat sorted_unique_columns(const Mat& v) {
  std::vector<Vec> cols;
  for (Index k = 0; k < v.cols(); ++k) cols.emplace_back(v.col(k));
  std::sort(cols.begin(), cols.end(), [](const Vec& a, const Vec& b) {
    return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
  });
  cols.erase(std::unique(cols.begin(), cols.end(), [](const Vec& a, const Vec& b) { return a == b; }), cols.end());
  Mat out(v.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = cols[k];
  return out;
}

Vec random_point(const Domain& domain, Rng& rng) {
  if (domain.kind() == Domain::Kind::kBall) return rng.in_ball(domain.center(), domain.radius());
  const Box b = domain.bounding_box();
  Vec x(b.dim());
  for (int k = 0; k < b.dim(); ++k) x[k] = rng.uniform(b.lo[k], b.hi[k]);
  return x;
}

}  // namespace

CConcavePotential CConcavePotential::from_convex(PCost cost, Domain domain, MaxAffineFunction varphi, bool c_concave,
                                                 std::string label) {
  if (varphi.dim() != domain.dim()) throw std::invalid_argument("CConcavePotential: dimension mismatch");
  auto f = std::make_shared<const MaxAffineFunction>(std::move(varphi));
  const double c = cost.concavity();
  ConvexSide side{[f](const Vec& x) { return (*f)(x); },
                  [f](const Vec& x) { return subdifferential(*f, x).vertices; }, cost.convex_lipschitz(), f};
  ValueFn phi = [f, c](const Vec& x) { return 0.5 * c * x.squaredNorm() - (*f)(x); };
  return CConcavePotential(cost, std::move(domain), std::move(phi), std::move(side), c_concave, std::move(label));
}

CConcavePotential CConcavePotential::closed_form(PCost cost, Domain domain, ValueFn phi, SubdiffFn convex_subdiff,
                                                 bool c_concave, std::string label) {
  const double c = cost.concavity();
  ConvexSide side{[phi, c](const Vec& x) { return 0.5 * c * x.squaredNorm() - phi(x); }, std::move(convex_subdiff),
                  cost.convex_lipschitz(), nullptr};
  return CConcavePotential(cost, std::move(domain), std::move(phi), std::move(side), c_concave, std::move(label));
}

CConcavePotential CConcavePotential::zero(PCost cost, Domain domain) {
  const double c = cost.concavity();
  return closed_form(
      cost, std::move(domain), [](const Vec&) { return 0.0; }, [c](const Vec& x) { return single_vertex(c * x); }, true,
      "zero");
}

CConcavePotential CConcavePotential::linear(PCost cost, Domain domain, Vec a) {
  if (a.size() != domain.dim()) throw std::invalid_argument("CConcavePotential::linear: dimension mismatch");
  const double c = cost.concavity();
  return closed_form(
      cost, std::move(domain), [a](const Vec& x) { return a.dot(x); },
      [a, c](const Vec& x) { return single_vertex(c * x - a); }, true, "linear");
}

CConcavePotential CConcavePotential::tightness(double p) {
  const PCost cost(p, 1.0);
  Domain dom = Domain::interval(-1.0, 1.0);
  if (p == 2.0) {
    // x^2 - (1 - |x|)^2 = 2|x| - 1 on [-1, 1].
    Mat a(1, 2);
    a << -2.0, 2.0;
    return from_convex(cost, std::move(dom), MaxAffineFunction(std::move(a), Vec::Constant(2, -1.0)), true,
                       "(1-|x|)^p");
  }
  const double c = cost.concavity();
  auto phi = [p](const Vec& x) { return std::pow(std::max(0.0, 1.0 - std::abs(x[0])), p); };
  auto sub = [p, c](const Vec& x) {
    const double t = x[0];
    if (t == 0.0) {
      Mat v(1, 2);
      v << -p, p;
      return v;
    }
    const double s = t > 0.0 ? 1.0 : -1.0;
    return Mat(Mat::Constant(1, 1, c * t + p * s * std::pow(std::max(0.0, 1.0 - std::abs(t)), p - 1.0)));
  };
  return closed_form(cost, std::move(dom), phi, sub, true, "(1-|x|)^p");
}

CConcavePotential CConcavePotential::c_bar_transform(PCost cost, Domain domain, Mat targets, Vec psi) {
  if (targets.rows() != domain.dim() || targets.cols() != psi.size() || targets.cols() == 0)
    throw std::invalid_argument("c_bar_transform: targets/psi mismatch");
  const double p = cost.p;
  CConcavePotential out = [&]() {
    if (p == 2.0) {
      // |x|^2 - min_j (|x - y_j|^2 - psi_j) = max_j <2 y_j, x> - |y_j|^2 + psi_j
      Mat a = 2.0 * targets;
      Vec b = psi - targets.colwise().squaredNorm().transpose();
      return from_convex(cost, domain, MaxAffineFunction(std::move(a), std::move(b)), true, "c-bar transform");
    }
    const double c = cost.concavity();
    auto values = [targets, psi, p](const Vec& x) {
      Vec h(targets.cols());
      for (Index j = 0; j < targets.cols(); ++j) h[j] = pcost(x, targets.col(j), p) - psi[j];
      return h;
    };
    auto phi = [values](const Vec& x) { return values(x).minCoeff(); };
    auto sub = [values, targets, p, c](const Vec& x) {
      const Vec h = values(x);
      const double lo = h.minCoeff();
      const double tol = 1e-12 * (1.0 + h.cwiseAbs().maxCoeff());
      std::vector<Index> act;
      for (Index j = 0; j < h.size(); ++j)
        if (h[j] <= lo + tol) act.push_back(j);
      Mat v(x.size(), static_cast<Index>(act.size()));
      for (std::size_t k = 0; k < act.size(); ++k)
        v.col(static_cast<Index>(k)) = c * x - grad_xi_p(Vec(x - targets.col(act[k])), p);
      return v;
    };
    return closed_form(cost, domain, phi, sub, true, "c-bar transform");
  }();
  out.targets_ = std::move(targets);
  out.psi_ = std::move(psi);
  return out;
}

double CConcavePotential::operator()(const Eigen::Ref<const Vec>& x) const { return phi_(Vec(x)); }

SubdiffPolytope CConcavePotential::convex_subdifferential(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != domain_.dim()) throw std::invalid_argument("CConcavePotential: point dimension mismatch");
  return {sorted_unique_columns(convex_.subdifferential(Vec(x)))};
}

CConcavePotential phi_from_convex(PCost cost, Domain domain, MaxAffineFunction varphi) {
  return CConcavePotential::from_convex(cost, std::move(domain), std::move(varphi), true);
}

// ---------------------------------------------------------------------------

Vec grad_phi(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& g) {
  return pot.cost().concavity() * x - g;
}

Vec t_phi_with(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& g) {
  const Vec z = grad_phi(pot, x, g);
  return x - grad_xi_p_inverse(z, pot.cost().p);
}

Vec t_phi(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x) {
  const SubdiffPolytope s = pot.convex_subdifferential(x);
  if (s.diameter() >= 1e-10) {
    std::ostringstream os;
    os << "t_phi: potential is not differentiable at x (subdifferential diameter " << s.diameter() << ")";
    throw NonDifferentiableError(os.str());
  }
  Vec y = t_phi_with(pot, x, s.vertices.col(0));
  if (!pot.domain().contains(y, 1e-8)) {
    std::ostringstream os;
    os.precision(17);
    os << "t_phi: image " << y.transpose() << " leaves " << pot.domain().describe();
    throw DomainEscapeError(os.str());
  }
  return y;
}

PartialCDiam diam_partial_c(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("diam_partial_c: eta must be > 0");
  const double p = pot.cost().p;
  const double radius = pot.cost().radius;
  const int d = pot.domain().dim();
  const auto& side = pot.convex_side();
  PartialCDiam out;

  if (side.polyhedral) {
    out.convex_diam = diam_subdiff_ball(*side.polyhedral, x, eta);
    out.convex_diam_exact = true;
  } else if (d == 1) {
    // Monotone subdifferential: the image of an interval is spanned by the
    // lowest vertex at its left end and the highest at its right end.
    const Box b = pot.domain().bounding_box();
    const Vec left = Vec::Constant(1, std::max(x[0] - eta, b.lo[0]));
    const Vec right = Vec::Constant(1, std::min(x[0] + eta, b.hi[0]));
    out.convex_diam = pot.convex_subdifferential(right).vertices.maxCoeff() -
                      pot.convex_subdifferential(left).vertices.minCoeff();
    out.convex_diam_exact = true;
  } else {
    const int n = 21;
    std::vector<Vec> pts;
    Vec y(d);
    Index total = 1;
    for (int k = 0; k < d; ++k) total *= n;
    for (Index flat = 0; flat < total; ++flat) {
      Index rest = flat;
      for (int k = 0; k < d; ++k) {
        y[k] = x[k] - eta + 2.0 * eta * static_cast<double>(rest % n) / (n - 1);
        rest /= n;
      }
      if ((y - x).norm() > eta * (1.0 + 1e-12) || !pot.domain().contains(y, 0.0)) continue;
      const Mat v = pot.convex_subdifferential(y).vertices;
      for (Index k = 0; k < v.cols(); ++k) pts.emplace_back(v.col(k));
    }
    if (d == 2) {
      // The grid misses most of the boundary circle.
      for (int k = 0; k < 256; ++k) {
        const double a = 2.0 * std::numbers::pi * k / 256;
        y << x[0] + eta * std::cos(a), x[1] + eta * std::sin(a);
        if (!pot.domain().contains(y, 0.0)) continue;
        const Mat v = pot.convex_subdifferential(y).vertices;
        for (Index j = 0; j < v.cols(); ++j) pts.emplace_back(v.col(j));
      }
    }
    Mat all(d, static_cast<Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) all.col(static_cast<Index>(k)) = pts[k];
    out.convex_diam = point_set_diameter(all);
    out.convex_diam_exact = false;
  }

  const double beta = 1.0 / (p - 1.0);
  out.bound = 8.0 * p * (1.0 + std::pow(radius, (p - 2.0) / (p - 1.0))) *
              (std::pow(eta, beta) + std::pow(out.convex_diam, beta));

  if (d == 1) {
    const Box b = pot.domain().bounding_box();
    const Vec left = Vec::Constant(1, std::max(x[0] - eta, b.lo[0]));
    const Vec right = Vec::Constant(1, std::min(x[0] + eta, b.hi[0]));
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const Mat vl = pot.convex_subdifferential(left).vertices;
    const Mat vr = pot.convex_subdifferential(right).vertices;
    for (Index k = 0; k < vl.cols(); ++k) lo = std::min(lo, t_phi_with(pot, left, vl.col(k))[0]);
    for (Index k = 0; k < vr.cols(); ++k) hi = std::max(hi, t_phi_with(pot, right, vr.col(k))[0]);
    out.exact = hi - lo;
  } else if (p == 2.0 && side.polyhedral) {
    out.exact = 0.5 * out.convex_diam;  // y = g / 2 when p = 2
  }
  return out;
}

PotentialAudit audit_potential(const CConcavePotential& pot, Rng& rng, int samples) {
  PotentialAudit out;
  out.min_midpoint_gap = std::numeric_limits<double>::infinity();
  const double lip = pot.cost().lipschitz();
  const auto& side = pot.convex_side();
  double scale = 1.0;
  for (int s = 0; s < samples; ++s) {
    const Vec x = random_point(pot.domain(), rng);
    const Vec y = random_point(pot.domain(), rng);
    const double dist = (x - y).norm();
    if (dist > 0.0) out.max_lipschitz_ratio = std::max(out.max_lipschitz_ratio, std::abs(pot(x) - pot(y)) / dist / lip);
    const double fx = side.value(x);
    const double fy = side.value(y);
    scale = std::max({scale, std::abs(fx), std::abs(fy)});
    out.min_midpoint_gap = std::min(out.min_midpoint_gap, 0.5 * (fx + fy) - side.value(Vec(0.5 * (x + y))));
  }
  out.ok = out.max_lipschitz_ratio <= 1.0 + 1e-9 && out.min_midpoint_gap >= -1e-9 * scale;
  return out;
}

}  // namespace pushstab
