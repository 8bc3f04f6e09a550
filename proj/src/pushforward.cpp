#include "pushstab/pushforward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "pushstab/hull.hpp"

namespace pushstab {

namespace {

constexpr double kSingularDiam = 1e-10;
constexpr double kEscapeTol = 1e-8;

Vec project_into(const Domain& domain, const Vec& y) {
  if (domain.kind() == Domain::Kind::kBall) {
    const Vec off = y - domain.center();
    const double n = off.norm();
    return n <= domain.radius() ? y : Vec(domain.center() + off * (domain.radius() / n));
  }
  const Box b = domain.bounding_box();
  return y.cwiseMax(b.lo).cwiseMin(b.hi);
}

// Builds image = merged (p2)# coupling, with the coupling from the input atoms.
PushforwardResult assemble(const DiscreteMeasure& rho, const Mat& images, const Domain& image_domain, Index hits) {
  Mat pts = images;
  for (Index i = 0; i < pts.cols(); ++i) {
    if (!image_domain.contains(pts.col(i), kEscapeTol)) {
      std::ostringstream os;
      os.precision(17);
      os << "pushforward: image " << pts.col(i).transpose() << " leaves " << image_domain.describe();
      throw DomainEscapeError(os.str());
    }
    pts.col(i) = project_into(image_domain, pts.col(i));
  }
  auto image = std::make_shared<const DiscreteMeasure>(
      DiscreteMeasure(image_domain, pts, rho.weights()).merged());
  std::map<std::vector<double>, Index> where;
  for (Index j = 0; j < image->size(); ++j) {
    const auto c = image->point(j);
    where.emplace(std::vector<double>(c.data(), c.data() + c.size()), j);
  }
  std::vector<CouplingEntry> entries;
  for (Index i = 0; i < rho.size(); ++i) {
    if (rho.weight(i) <= 0.0) continue;
    const auto c = pts.col(i);
    entries.push_back({i, where.at(std::vector<double>(c.data(), c.data() + c.size())), rho.weight(i)});
  }
  Coupling coupling(std::make_shared<const DiscreteMeasure>(rho), image, std::move(entries));
  return {*image, std::move(coupling), hits};
}

Domain default_gradient_domain(int d, double lip) { return Domain::ball(d, lip > 0.0 ? lip : 1.0); }

// Picks g in s: the unique element at regular points, the policy otherwise.
Vec choose(const SubdiffPolytope& s, const SelectionPolicy& policy, Index atom, Index& hits) {
  if (s.diameter() > kSingularDiam) {
    ++hits;
    return policy.select(s, atom);
  }
  return s.vertices.col(0);
}

SubdiffPolytope minkowski_blend(const SubdiffPolytope& s0, const SubdiffPolytope& s1, double t) {
  std::vector<Vec> verts;
  for (Index a = 0; a < s0.vertices.cols(); ++a)
    for (Index b = 0; b < s1.vertices.cols(); ++b) {
      const Vec u = s0.vertices.col(a);
      const Vec w = s1.vertices.col(b);
      verts.push_back(t == 0.0 ? u : t == 1.0 ? w : Vec(u + t * (w - u)));
    }
  std::sort(verts.begin(), verts.end(), [](const Vec& u, const Vec& w) {
    return std::lexicographical_compare(u.data(), u.data() + u.size(), w.data(), w.data() + w.size());
  });
  verts.erase(std::unique(verts.begin(), verts.end(), [](const Vec& u, const Vec& w) { return u == w; }), verts.end());
  SubdiffPolytope out{Mat(s0.vertices.rows(), static_cast<Index>(verts.size()))};
  for (std::size_t k = 0; k < verts.size(); ++k) out.vertices.col(static_cast<Index>(k)) = verts[k];
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SelectionPolicy

SelectionPolicy SelectionPolicy::fixed_index(Index k) {
  if (k < 0) throw std::invalid_argument("SelectionPolicy::fixed_index: negative index");
  SelectionPolicy s(Kind::kFixedIndex);
  s.index_ = k;
  return s;
}

SelectionPolicy SelectionPolicy::user_vectors(Mat vectors) {
  SelectionPolicy s(Kind::kUserVectors);
  s.vectors_ = std::move(vectors);
  return s;
}

std::string SelectionPolicy::describe() const {
  switch (kind_) {
    case Kind::kMinNorm: return "min-norm";
    case Kind::kMaxFirstCoordinate: return "max-first-coordinate";
    case Kind::kFixedIndex: return "fixed-index " + std::to_string(index_);
    case Kind::kUserVectors: return "user-vectors";
  }
  return "?";
}

Vec SelectionPolicy::select(const SubdiffPolytope& s, Index atom) const {
  const Mat& v = s.vertices;
  Vec g;
  switch (kind_) {
    case Kind::kMinNorm:
      g = min_norm_point(v);
      break;
    case Kind::kMaxFirstCoordinate: {
      Index k = 0;
      v.row(0).maxCoeff(&k);
      g = v.col(k);
      break;
    }
    case Kind::kFixedIndex:
      g = v.col(std::min(index_, v.cols() - 1));
      break;
    case Kind::kUserVectors:
      if (atom < 0 || atom >= vectors_.cols()) throw std::out_of_range("SelectionPolicy: no user vector for atom");
      g = vectors_.col(atom);
      break;
  }
  if (!in_hull(v, g, 1e-8)) {
    std::ostringstream os;
    os << "SelectionPolicy(" << describe() << "): selected vector is outside the subdifferential";
    throw std::domain_error(os.str());
  }
  return g;
}

// ---------------------------------------------------------------------------

PushforwardResult pushforward_convex(const MaxAffineFunction& f, const DiscreteMeasure& rho,
                                     const SelectionPolicy& policy, std::optional<Domain> image_domain) {
  if (f.dim() != rho.dim()) throw std::invalid_argument("pushforward_convex: dimension mismatch");
  const Domain dom = image_domain ? *image_domain : default_gradient_domain(f.dim(), f.lipschitz());
  Mat images(rho.dim(), rho.size());
  Index hits = 0;
  for (Index i = 0; i < rho.size(); ++i) images.col(i) = choose(subdifferential(f, rho.point(i)), policy, i, hits);
  return assemble(rho, images, dom, hits);
}

PushforwardResult pushforward_convex(const MaxAffineFunction& f, const GridDensity& rho,
                                     const SelectionPolicy& policy, std::optional<Domain> image_domain) {
  return pushforward_convex(f, discretize(rho), policy, std::move(image_domain));
}

PushforwardResult pushforward_tmap(const CConcavePotential& pot, const DiscreteMeasure& rho,
                                   const SelectionPolicy& policy) {
  if (pot.domain().dim() != rho.dim()) throw std::invalid_argument("pushforward_tmap: dimension mismatch");
  Mat images(rho.dim(), rho.size());
  Index hits = 0;
  for (Index i = 0; i < rho.size(); ++i) {
    const Vec x = rho.point(i);
    images.col(i) = t_phi_with(pot, x, choose(pot.convex_subdifferential(x), policy, i, hits));
  }
  return assemble(rho, images, pot.domain(), hits);
}

PushforwardResult pushforward_tmap(const CConcavePotential& pot, const GridDensity& rho,
                                   const SelectionPolicy& policy) {
  return pushforward_tmap(pot, discretize(rho), policy);
}

PushforwardResult lot_interpolant(const MaxAffineFunction& phi0, const MaxAffineFunction& phi1, double t,
                                  const DiscreteMeasure& rho, const SelectionPolicy& policy,
                                  std::optional<Domain> image_domain) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("lot_interpolant: t must lie in [0, 1]");
  if (phi0.dim() != rho.dim() || phi1.dim() != rho.dim())
    throw std::invalid_argument("lot_interpolant: dimension mismatch");
  const Domain dom = image_domain ? *image_domain
                                  : default_gradient_domain(rho.dim(), std::max(phi0.lipschitz(), phi1.lipschitz()));
  Mat images(rho.dim(), rho.size());
  Index hits = 0;
  for (Index i = 0; i < rho.size(); ++i) {
    const auto x = rho.point(i);
    images.col(i) = choose(minkowski_blend(subdifferential(phi0, x), subdifferential(phi1, x), t), policy, i, hits);
  }
  return assemble(rho, images, dom, hits);
}

PushforwardResult lot_interpolant(const MaxAffineFunction& phi0, const MaxAffineFunction& phi1, double t,
                                  const GridDensity& rho, const SelectionPolicy& policy,
                                  std::optional<Domain> image_domain) {
  return lot_interpolant(phi0, phi1, t, discretize(rho), policy, std::move(image_domain));
}

// ---------------------------------------------------------------------------
// Brenier potential from the discrete plan

namespace {

constexpr double kNoEdge = -std::numeric_limits<double>::infinity();

// Minimum cycle mean of a dense digraph (weights[u][v], -inf = no edge is
// encoded by the caller as +inf here). Karp's recurrence; +inf if acyclic.
double min_mean_cycle(const Mat& weight) {
  const Index m = weight.rows();
  const double inf = std::numeric_limits<double>::infinity();
  Mat dist = Mat::Constant(m + 1, m, inf);
  dist.row(0).setZero();
  for (Index k = 1; k <= m; ++k)
    for (Index v = 0; v < m; ++v) {
      double best = inf;
      for (Index u = 0; u < m; ++u)
        if (dist(k - 1, u) < inf && weight(u, v) < inf) best = std::min(best, dist(k - 1, u) + weight(u, v));
      dist(k, v) = best;
    }
  double mu = inf;
  for (Index v = 0; v < m; ++v) {
    if (!(dist(m, v) < inf)) continue;
    double worst = -inf;
    for (Index k = 0; k < m; ++k)
      if (dist(k, v) < inf) worst = std::max(worst, (dist(m, v) - dist(k, v)) / static_cast<double>(m - k));
    mu = std::min(mu, worst);
  }
  return mu;
}

}  // namespace

BrenierPotential potential_from_discrete_ot(const DiscreteMeasure& rho, const DiscreteMeasure& mu, double p) {
  if (p != 2.0) throw std::invalid_argument("potential_from_discrete_ot: only the quadratic cost is supported");
  if (rho.dim() != mu.dim()) throw std::invalid_argument("potential_from_discrete_ot: dimension mismatch");
  const TransportSolution sol = solve_transport(rho, mu, 2.0);
  const Index n = rho.size();
  const Index m = mu.size();
  const Mat& y = mu.points();

  // Raw Brenier-side duals: |x|^2/2 - phi/2 = max_j <x, y_j> - v_j.
  Vec v_raw(m);
  for (Index j = 0; j < m; ++j) v_raw[j] = 0.5 * (y.col(j).squaredNorm() - sol.duals.phi_c[j]);

  std::vector<Index> assigned(static_cast<std::size_t>(n), -1);
  std::vector<int> uses(static_cast<std::size_t>(n), 0);
  for (const auto& e : sol.coupling.entries()) {
    assigned[static_cast<std::size_t>(e.i)] = e.j;
    ++uses[static_cast<std::size_t>(e.i)];
  }
  BrenierPotential out{MaxAffineFunction(y, -v_raw)};
  for (Index i = 0; i < n; ++i)
    if (uses[static_cast<std::size_t>(i)] > 1) ++out.split_atoms;

  // w(j, k) = max over unsplit atoms sent to j of <x_i, y_k - y_j>; margin
  // delta is feasible iff v_k - v_j >= w(j, k) + delta has no positive cycle.
  Mat w = Mat::Constant(m, m, kNoEdge);
  for (Index i = 0; i < n; ++i) {
    if (uses[static_cast<std::size_t>(i)] != 1) continue;
    const Index j = assigned[static_cast<std::size_t>(i)];
    const Vec proj = y.transpose() * rho.point(i);
    for (Index k = 0; k < m; ++k)
      if (k != j) w(j, k) = std::max(w(j, k), proj[k] - proj[j]);
  }

  auto margin_of = [&](const Vec& v) {
    double worst = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (uses[static_cast<std::size_t>(i)] != 1) continue;
      const Index j = assigned[static_cast<std::size_t>(i)];
      const Vec val = y.transpose() * rho.point(i) - v;
      for (Index k = 0; k < m; ++k)
        if (k != j) worst = std::min(worst, val[j] - val[k]);
    }
    return worst;
  };

  const double inf = std::numeric_limits<double>::infinity();
  Mat neg = Mat::Constant(m, m, inf);
  double scale = 1.0;
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k)
      if (w(j, k) > kNoEdge) {
        neg(j, k) = -w(j, k);
        scale = std::max(scale, std::abs(w(j, k)));
      }
  const double best = m > 1 ? min_mean_cycle(neg) : inf;
  out.margin = margin_of(v_raw);
  if (!(best > 1e-12 * scale)) return out;  // ties are genuine; keep raw duals

  const double delta = std::isfinite(best) ? 0.5 * best : 1.0;
  Vec v = Vec::Zero(m);
  bool changed = true;
  for (Index round = 0; round <= m && changed; ++round) {
    changed = false;
    for (Index j = 0; j < m; ++j)
      for (Index k = 0; k < m; ++k)
        if (w(j, k) > kNoEdge && v[j] + w(j, k) + delta > v[k]) {
          v[k] = v[j] + w(j, k) + delta;
          changed = true;
        }
  }
  const double refined_margin = margin_of(v);
  if (changed || !(refined_margin > 0.0)) return out;
  v.array() -= v.mean() - v_raw.mean();  // cosmetic: keep intercepts near the raw ones
  out.potential = MaxAffineFunction(y, -v);
  out.margin = margin_of(v);
  out.refined = true;
  return out;
}

// ---------------------------------------------------------------------------
// Laguerre cells

Index laguerre_cell(const CConcavePotential& pot, const Eigen::Ref<const Vec>& x) {
  const Mat* y = pot.targets();
  const Vec* psi = pot.psi();
  if (!y || !psi) throw std::invalid_argument("laguerre_cell: potential has no target set");
  Index best = 0;
  double lo = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < y->cols(); ++j) {
    const double h = pcost(x, y->col(j), pot.cost().p) - (*psi)[j];
    if (h < lo) {
      lo = h;
      best = j;
    }
  }
  return best;
}

Vec laguerre_masses(const CConcavePotential& pot, const Measure1D& rho, const SelectionPolicy&) {
  if (!pot.targets()) throw std::invalid_argument("laguerre_masses: potential has no target set");
  if (pot.domain().dim() != 1) throw std::invalid_argument("laguerre_masses: 1D potential expected");
  Vec masses = Vec::Zero(pot.targets()->cols());
  auto cell = [&](double x) { return laguerre_cell(pot, Vec::Constant(1, x)); };
  // The 1D map is monotone, so equal cells at both ends of a segment mean
  // the whole segment lies in that cell.
  auto split = [&](auto&& self, double a, double b, Index ca, Index cb, double density) -> void {
    if (ca == cb) {
      masses[ca] += (b - a) * density;
      return;
    }
    if (b - a <= 1e-15 * (1.0 + std::abs(a))) {
      masses[ca] += 0.5 * (b - a) * density;
      masses[cb] += 0.5 * (b - a) * density;
      return;
    }
    const double mid = 0.5 * (a + b);
    const Index cm = cell(mid);
    self(self, a, mid, ca, cm, density);
    self(self, mid, b, cm, cb, density);
  };
  for (const auto& iv : rho.intervals()) {
    if (iv.mass <= 0.0) continue;
    split(split, iv.lo, iv.hi, cell(iv.lo), cell(iv.hi), iv.mass / (iv.hi - iv.lo));
  }
  for (const auto& at : rho.atoms()) masses[cell(at.location)] += at.mass;
  return masses;
}

LaguerreQuadrature laguerre_masses(const CConcavePotential& pot, const GridDensity& rho, int sub) {
  if (!pot.targets()) throw std::invalid_argument("laguerre_masses: potential has no target set");
  if (sub < 1) throw std::invalid_argument("laguerre_masses: sub must be >= 1");
  const int d = rho.dim();
  LaguerreQuadrature out{Vec::Zero(pot.targets()->cols())};
  const Vec width = rho.cell_widths();
  const Vec h = width / sub;
  Index per_cell = 1;
  Index corners = 1;
  for (int k = 0; k < d; ++k) {
    per_cell *= sub;
    corners *= sub + 1;
  }
  std::vector<Index> corner_cell(static_cast<std::size_t>(corners));
  for (Index c = 0; c < rho.cell_count(); ++c) {
    const double mass = rho.masses()[static_cast<std::size_t>(c)];
    if (mass <= 0.0) continue;
    const Vec lo = rho.cell_center(c) - 0.5 * width;
    Vec x(d);
    for (Index q = 0; q < corners; ++q) {
      Index rest = q;
      for (int k = 0; k < d; ++k) {
        x[k] = lo[k] + h[k] * static_cast<double>(rest % (sub + 1));
        rest /= sub + 1;
      }
      corner_cell[static_cast<std::size_t>(q)] = laguerre_cell(pot, x);
    }
    const double sub_mass = mass / static_cast<double>(per_cell);
    for (Index s = 0; s < per_cell; ++s) {
      Index rest = s;
      std::vector<Index> idx(static_cast<std::size_t>(d));
      for (int k = 0; k < d; ++k) {
        idx[static_cast<std::size_t>(k)] = rest % sub;
        x[k] = lo[k] + h[k] * (static_cast<double>(idx[static_cast<std::size_t>(k)]) + 0.5);
        rest /= sub;
      }
      const Index mine = laguerre_cell(pot, x);
      out.masses[mine] += sub_mass;
      bool uniform = true;
      for (Index corner = 0; corner < (Index{1} << d) && uniform; ++corner) {
        Index flat = 0;
        Index stride = 1;
        for (int k = 0; k < d; ++k) {
          flat += (idx[static_cast<std::size_t>(k)] + ((corner >> k) & 1)) * stride;
          stride *= sub + 1;
        }
        uniform = corner_cell[static_cast<std::size_t>(flat)] == mine;
      }
      if (!uniform) out.straddle_mass += sub_mass;
    }
  }
  return out;
}

}  // namespace pushstab
