#include "pushstab/max_affine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "pushstab/csv.hpp"
#include "pushstab/hull.hpp"

namespace pushstab {

MaxAffineFunction::MaxAffineFunction(Mat slopes, Vec intercepts)
    : slopes_(std::move(slopes)), intercepts_(std::move(intercepts)) {
  if (slopes_.cols() == 0 || slopes_.rows() == 0) throw std::invalid_argument("MaxAffineFunction: no pieces");
  if (intercepts_.size() != slopes_.cols()) throw std::invalid_argument("MaxAffineFunction: intercept count mismatch");
  if (!slopes_.allFinite() || !intercepts_.allFinite()) throw std::invalid_argument("MaxAffineFunction: non-finite data");
}

MaxAffineFunction MaxAffineFunction::affine(Vec slope, double intercept) {
  Mat a = slope;
  return MaxAffineFunction(std::move(a), Vec::Constant(1, intercept));
}

MaxAffineFunction MaxAffineFunction::abs() {
  Mat a(1, 2);
  a << -1.0, 1.0;
  return MaxAffineFunction(std::move(a), Vec::Zero(2));
}

double MaxAffineFunction::operator()(const Eigen::Ref<const Vec>& x) const { return piece_values(x).maxCoeff(); }

Vec MaxAffineFunction::piece_values(const Eigen::Ref<const Vec>& x) const {
  if (x.size() != dim()) throw std::invalid_argument("MaxAffineFunction: point dimension mismatch");
  return slopes_.transpose() * x + intercepts_;
}

double MaxAffineFunction::lipschitz() const { return slopes_.colwise().norm().maxCoeff(); }

double MaxAffineFunction::roundoff(const Eigen::Ref<const Vec>& x) const {
  const double scale = intercepts_.cwiseAbs().maxCoeff() + slopes_.colwise().norm().maxCoeff() * x.norm();
  return 16.0 * std::numeric_limits<double>::epsilon() * scale;
}

std::vector<double> MaxAffineFunction::kinks() const {
  if (dim() != 1) throw std::invalid_argument("MaxAffineFunction::kinks: 1D only");
  std::vector<Index> order(static_cast<std::size_t>(pieces()));
  for (Index k = 0; k < pieces(); ++k) order[static_cast<std::size_t>(k)] = k;
  const auto a = [&](Index k) { return slopes_(0, k); };
  const auto b = [&](Index k) { return intercepts_[k]; };
  std::sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i) != a(j) ? a(i) < a(j) : b(i) > b(j); });
  // Upper envelope by the convex-hull trick.
  std::vector<Index> hull;
  for (Index k : order) {
    if (!hull.empty() && a(hull.back()) == a(k)) continue;  // same slope, lower intercept
    while (hull.size() >= 2) {
      const Index l1 = hull[hull.size() - 2];
      const Index l2 = hull.back();
      // l2 is useless when l3 overtakes l1 no later than l2 does.
      if ((b(l1) - b(k)) * (a(l2) - a(l1)) <= (b(l1) - b(l2)) * (a(k) - a(l1))) hull.pop_back();
      else break;
    }
    hull.push_back(k);
  }
  std::vector<double> out;
  for (std::size_t k = 0; k + 1 < hull.size(); ++k)
    out.push_back((b(hull[k]) - b(hull[k + 1])) / (a(hull[k + 1]) - a(hull[k])));
  return out;
}

// ---------------------------------------------------------------------------

double SubdiffPolytope::diameter() const { return point_set_diameter(vertices); }

std::vector<Index> active_pieces(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double tau) {
  if (tau < 0.0) throw std::invalid_argument("active_pieces: tau must be >= 0");
  const Vec v = f.piece_values(x);
  const double cut = v.maxCoeff() - tau - f.roundoff(x);
  std::vector<Index> out;
  for (Index k = 0; k < v.size(); ++k)
    if (v[k] >= cut) out.push_back(k);
  return out;
}

SubdiffPolytope subdifferential(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double tau) {
  const auto act = active_pieces(f, x, tau);
  std::vector<Vec> verts;
  for (Index k : act) verts.emplace_back(f.slopes().col(k));
  std::sort(verts.begin(), verts.end(), [](const Vec& u, const Vec& w) {
    return std::lexicographical_compare(u.data(), u.data() + u.size(), w.data(), w.data() + w.size());
  });
  verts.erase(std::unique(verts.begin(), verts.end(), [](const Vec& u, const Vec& w) { return u == w; }), verts.end());
  SubdiffPolytope out{Mat(f.dim(), static_cast<Index>(verts.size()))};
  for (std::size_t k = 0; k < verts.size(); ++k) out.vertices.col(static_cast<Index>(k)) = verts[k];
  return out;
}

// ---------------------------------------------------------------------------
// Ball activity

BallActivity::BallActivity(const MaxAffineFunction& f) : f_(&f) {
  const Index k = f.pieces();
  slope_dist_.resize(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) slope_dist_(i, j) = (f.slopes().col(i) - f.slopes().col(j)).norm();
}

namespace {

constexpr double kTie = 1e-12;

// Calls visit(subset) for every subset of {0..m-1} with 1 <= size <= max_size;
// stops early when visit returns true.
template <typename Visit>
bool for_each_subset(int m, int max_size, std::vector<int>& cur, int start, Visit&& visit) {
  for (int k = start; k < m; ++k) {
    cur.push_back(k);
    if (visit(cur)) return true;
    if (static_cast<int>(cur.size()) < max_size && for_each_subset(m, max_size, cur, k + 1, visit)) return true;
    cur.pop_back();
  }
  return false;
}

}  // namespace

bool BallActivity::piece_reaches(Index i, const Eigen::Ref<const Vec>&, double eta, const Vec& values) const {
  const MaxAffineFunction& f = *f_;
  const double tie = kTie * (1.0 + values.cwiseAbs().maxCoeff());
  // Piece i is maximal at x + z iff <a_j - a_i, z> <= v_i - v_j for all j.
  std::vector<Index> kept;
  for (Index j = 0; j < f.pieces(); ++j) {
    if (j == i) continue;
    const double s = values[i] - values[j];
    const double reach = eta * slope_dist_(i, j);
    if (s + reach < -tie) return false;  // j dominates i on the whole ball
    if (s - reach >= 0.0) continue;       // i dominates j on the whole ball
    if (slope_dist_(i, j) == 0.0) continue;
    kept.push_back(j);
  }
  if (kept.empty()) return true;

  const int m = static_cast<int>(kept.size());
  const int d = f.dim();
  Mat g(m, d);
  Vec s(m);
  for (int r = 0; r < m; ++r) {
    g.row(r) = (f.slopes().col(kept[static_cast<std::size_t>(r)]) - f.slopes().col(i)).transpose();
    s[r] = values[i] - values[kept[static_cast<std::size_t>(r)]];
  }
  auto feasible = [&](const Vec& z) { return ((g * z - s).array() <= tie).all(); };
  if (feasible(Vec::Zero(d))) return true;

  // The projection of x onto the piece's region is the minimal-norm solution
  // of some linearly independent subsystem G_S z = s_S with |S| <= d.
  std::vector<int> cur;
  return for_each_subset(m, std::min(m, d), cur, 0, [&](const std::vector<int>& sub) {
    const auto k = static_cast<Index>(sub.size());
    Mat gs(k, d);
    Vec ss(k);
    for (Index r = 0; r < k; ++r) {
      gs.row(r) = g.row(sub[static_cast<std::size_t>(r)]);
      ss[r] = s[sub[static_cast<std::size_t>(r)]];
    }
    const Mat gram = gs * gs.transpose();
    Eigen::FullPivLU<Mat> lu(gram);
    lu.setThreshold(1e-12);
    if (lu.rank() < k) return false;
    const Vec z = gs.transpose() * lu.solve(ss);
    return z.norm() <= eta + tie && feasible(z);
  });
}

std::vector<Index> BallActivity::active(const Eigen::Ref<const Vec>& x, double eta) const {
  if (!(eta >= 0.0)) throw std::invalid_argument("BallActivity: eta must be >= 0");
  const Vec values = f_->piece_values(x);
  std::vector<Index> out;
  for (Index i = 0; i < f_->pieces(); ++i)
    if (piece_reaches(i, x, eta, values)) out.push_back(i);
  return out;
}

double BallActivity::diameter(const Eigen::Ref<const Vec>& x, double eta) const {
  const auto act = active(x, eta);
  double d = 0.0;
  for (std::size_t a = 0; a < act.size(); ++a)
    for (std::size_t b = a + 1; b < act.size(); ++b) d = std::max(d, slope_dist_(act[a], act[b]));
  return d;
}

double diam_subdiff_ball(const MaxAffineFunction& f, const Eigen::Ref<const Vec>& x, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("diam_subdiff_ball: eta must be > 0");
  return BallActivity(f).diameter(x, eta);
}

// ---------------------------------------------------------------------------

MaxAffineFunction xi_function(int n, double lip, double radius) {
  if (n < 1 || !(lip > 0.0) || !(radius > 0.0)) throw std::invalid_argument("xi_function: need N >= 1, L > 0, R > 0");
  Mat a(1, n + 1);
  Vec b(n + 1);
  for (int i = 0; i <= n; ++i) {
    a(0, i) = (2.0 * i / n - 1.0) * lip;
    b[i] = 2.0 * lip * radius / (static_cast<double>(n) * (n + 1)) * i * (n - i);
  }
  return MaxAffineFunction(std::move(a), std::move(b));
}

std::vector<double> xi_singular_points(int n, double radius) {
  std::vector<double> x;
  for (int i = 1; i <= n; ++i) x.push_back((2.0 * i / (n + 1) - 1.0) * radius);
  return x;
}

MaxAffineFunction lipschitz_extension(const MaxAffineFunction& f) { return f; }

MaxAffineFunction lipschitz_extension(const std::function<double(const Vec&)>& value,
                                      const std::function<Vec(const Vec&)>& subgradient, const Mat& samples) {
  if (samples.cols() == 0) throw std::invalid_argument("lipschitz_extension: no samples");
  Mat a(samples.rows(), samples.cols());
  Vec b(samples.cols());
  for (Index k = 0; k < samples.cols(); ++k) {
    const Vec x = samples.col(k);
    const Vec g = subgradient(x);
    a.col(k) = g;
    b[k] = value(x) - g.dot(x);
  }
  return MaxAffineFunction(std::move(a), std::move(b));
}

MaxAffineFunction random_max_affine(Rng& rng, const Domain& domain, int pieces, double lip_max) {
  if (pieces < 1 || !(lip_max > 0.0)) throw std::invalid_argument("random_max_affine: need pieces >= 1, lip_max > 0");
  Vec center;
  double radius;
  if (domain.kind() == Domain::Kind::kBall) {
    center = domain.center();
    radius = domain.radius();
  } else {
    const Box box = domain.bounding_box();
    center = 0.5 * (box.lo + box.hi);
    radius = 0.5 * (box.hi - box.lo).minCoeff();
  }
  const int d = domain.dim();
  // Tangent planes of (kappa/2)|x - c|^2 at anchors in B(c, 0.9 r): each
  // piece touches the paraboloid at its own anchor, so it is maximal near it
  // until the intercept noise pushes it under its neighbours.
  const double kappa = lip_max / (0.9 * radius);
  // Noise shrinks with the squared anchor spacing so that many pieces stay visible.
  const double noise = 0.1 * lip_max * radius * std::pow(static_cast<double>(pieces), -2.0 / d);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Mat a(d, pieces);
    Vec b(pieces);
    for (int k = 0; k < pieces; ++k) {
      const Vec slope = rng.in_ball(Vec::Zero(d), lip_max);
      const Vec anchor = center + slope / kappa;
      a.col(k) = slope;
      b[k] = slope.squaredNorm() / (2.0 * kappa) - slope.dot(anchor) + rng.uniform(0.0, noise);
    }
    MaxAffineFunction f(std::move(a), std::move(b));
    if (static_cast<int>(BallActivity(f).active(center, radius).size()) == pieces) return f;
  }
  throw std::runtime_error("random_max_affine: rejection sampling did not converge");
}

void write_max_affine_csv(std::ostream& os, const MaxAffineFunction& f) {
  for (int k = 0; k < f.dim(); ++k) os << 'a' << (k + 1) << ',';
  os << "b\n";
  for (Index j = 0; j < f.pieces(); ++j) {
    for (int k = 0; k < f.dim(); ++k) os << format_double(f.slopes()(k, j)) << ',';
    os << format_double(f.intercepts()[j]) << '\n';
  }
}

MaxAffineFunction read_max_affine_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
    const auto cells = split_csv_line(line);
    std::vector<double> vals;
    try {
      for (const auto& c : cells) vals.push_back(std::stod(c));
    } catch (const std::exception&) {
      if (rows.empty()) continue;  // header
      throw std::runtime_error(path.string() + ": malformed row");
    }
    if (vals.size() < 2 || (!rows.empty() && vals.size() != rows.front().size()))
      throw std::runtime_error(path.string() + ": inconsistent column count");
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no pieces");
  const auto d = static_cast<Index>(rows.front().size() - 1);
  Mat a(d, static_cast<Index>(rows.size()));
  Vec b(static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (Index k = 0; k < d; ++k) a(k, static_cast<Index>(j)) = rows[j][static_cast<std::size_t>(k)];
    b[static_cast<Index>(j)] = rows[j].back();
  }
  return MaxAffineFunction(std::move(a), std::move(b));
}

}  // namespace pushstab
