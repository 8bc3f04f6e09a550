#include "pushstab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <tuple>

#include "network_simplex.hpp"
#include "pushstab/csv.hpp"

namespace pushstab {

namespace {

constexpr double kMarginalTol = 1e-10;
constexpr std::int64_t kMassScale = 1'000'000'000'000;  // 1e12

// Weights are treated as uniform when they agree to a few ulps.
bool is_uniform(const Vec& w) {
  const double expected = 1.0 / static_cast<double>(w.size());
  return ((w.array() - expected).abs() <= 4e-16).all();
}

// Integer masses summing exactly to `total`, by largest remainder.
std::vector<std::int64_t> scale_weights(const Vec& w, std::int64_t total) {
  const double sum = w.sum();
  std::vector<std::int64_t> out(static_cast<std::size_t>(w.size()));
  std::vector<std::pair<double, std::size_t>> rem;
  std::int64_t assigned = 0;
  for (Index i = 0; i < w.size(); ++i) {
    const double exact = w[i] / sum * static_cast<double>(total);
    const double fl = std::floor(exact);
    out[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(fl);
    assigned += static_cast<std::int64_t>(fl);
    rem.emplace_back(exact - fl, static_cast<std::size_t>(i));
  }
  std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  std::int64_t left = total - assigned;
  for (std::size_t k = 0; left > 0; k = (k + 1) % rem.size(), --left) ++out[rem[k].second];
  for (std::size_t k = rem.size(); left < 0; --left) {  // only reachable through rounding of `exact`
    k = k == 0 ? rem.size() - 1 : k - 1;
    if (out[rem[k].second] > 0) --out[rem[k].second];
    else ++left;
  }
  return out;
}

struct Scaled {
  std::vector<std::int64_t> supply;
  std::vector<std::int64_t> demand;
  std::int64_t total;
};

Scaled scale_pair(const Vec& a, const Vec& b) {
  Scaled s;
  if (is_uniform(a) && is_uniform(b)) {
    const auto n = static_cast<std::int64_t>(a.size());
    const auto m = static_cast<std::int64_t>(b.size());
    s.total = std::lcm(n, m);
    s.supply.assign(static_cast<std::size_t>(n), s.total / n);
    s.demand.assign(static_cast<std::size_t>(m), s.total / m);
  } else {
    s.total = kMassScale;
    s.supply = scale_weights(a, kMassScale);
    s.demand = scale_weights(b, kMassScale);
  }
  return s;
}

std::vector<Index> positive_indices(const Vec& w) {
  std::vector<Index> idx;
  for (Index i = 0; i < w.size(); ++i)
    if (w[i] > 0.0) idx.push_back(i);
  return idx;
}

Vec gather(const Vec& w, const std::vector<Index>& idx) {
  Vec out(static_cast<Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<Index>(k)] = w[idx[k]];
  return out;
}

void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const char* who) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  if (mu.domain() != nu.domain())
    throw std::invalid_argument(std::string(who) + ": measures live on different domains (" + mu.domain().describe() +
                                " vs " + nu.domain().describe() + ")");
  if (std::abs(mu.weights().sum() - nu.weights().sum()) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": total masses differ");
}

// Max-flow (Dinic) on source -> i -> j -> sink with integer capacities.
class Dinic {
 public:
  explicit Dinic(int n) : adj_(static_cast<std::size_t>(n)), level_(static_cast<std::size_t>(n)), it_(static_cast<std::size_t>(n)) {}

  int add_edge(int u, int v, std::int64_t cap) {
    adj_[static_cast<std::size_t>(u)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({v, cap});
    adj_[static_cast<std::size_t>(v)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({u, 0});
    return static_cast<int>(edges_.size()) - 2;
  }

  std::int64_t max_flow(int s, int t) {
    std::int64_t flow = 0;
    while (bfs(s, t)) {
      std::fill(it_.begin(), it_.end(), 0);
      while (std::int64_t f = dfs(s, t, std::numeric_limits<std::int64_t>::max())) flow += f;
    }
    return flow;
  }

  std::int64_t flow_on(int e) const { return edges_[static_cast<std::size_t>(e ^ 1)].cap; }

 private:
  struct Edge {
    int to;
    std::int64_t cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int e : adj_[static_cast<std::size_t>(u)]) {
        const Edge& ed = edges_[static_cast<std::size_t>(e)];
        if (ed.cap > 0 && level_[static_cast<std::size_t>(ed.to)] < 0) {
          level_[static_cast<std::size_t>(ed.to)] = level_[static_cast<std::size_t>(u)] + 1;
          q.push(ed.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  // Iterative DFS would be nicer for deep graphs, but depth here is 3.
  std::int64_t dfs(int u, int t, std::int64_t f) {
    if (u == t) return f;
    auto& i = it_[static_cast<std::size_t>(u)];
    const auto& list = adj_[static_cast<std::size_t>(u)];
    for (; i < list.size(); ++i) {
      const int e = list[i];
      Edge& ed = edges_[static_cast<std::size_t>(e)];
      if (ed.cap <= 0 || level_[static_cast<std::size_t>(ed.to)] != level_[static_cast<std::size_t>(u)] + 1) continue;
      const std::int64_t got = dfs(ed.to, t, std::min(f, ed.cap));
      if (got > 0) {
        ed.cap -= got;
        edges_[static_cast<std::size_t>(e ^ 1)].cap += got;
        return got;
      }
    }
    return 0;
  }

  std::vector<std::vector<int>> adj_;
  std::vector<Edge> edges_;
  std::vector<int> level_;
  std::vector<std::size_t> it_;
};

// Hopcroft-Karp on an n x n bipartite graph; returns match of each left node or -1.
std::vector<int> hopcroft_karp(const std::vector<std::vector<int>>& adj, int n_right) {
  const int n_left = static_cast<int>(adj.size());
  std::vector<int> match_l(static_cast<std::size_t>(n_left), -1);
  std::vector<int> match_r(static_cast<std::size_t>(n_right), -1);
  std::vector<int> dist(static_cast<std::size_t>(n_left));
  constexpr int kInf = std::numeric_limits<int>::max();

  auto bfs = [&]() {
    std::queue<int> q;
    bool found = false;
    for (int u = 0; u < n_left; ++u) {
      if (match_l[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = 0;
        q.push(u);
      } else {
        dist[static_cast<std::size_t>(u)] = kInf;
      }
    }
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        const int w = match_r[static_cast<std::size_t>(v)];
        if (w < 0) {
          found = true;
        } else if (dist[static_cast<std::size_t>(w)] == kInf) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };

  std::function<bool(int)> dfs = [&](int u) {
    for (int v : adj[static_cast<std::size_t>(u)]) {
      const int w = match_r[static_cast<std::size_t>(v)];
      if (w < 0 || (dist[static_cast<std::size_t>(w)] == dist[static_cast<std::size_t>(u)] + 1 && dfs(w))) {
        match_l[static_cast<std::size_t>(u)] = v;
        match_r[static_cast<std::size_t>(v)] = u;
        return true;
      }
    }
    dist[static_cast<std::size_t>(u)] = kInf;
    return false;
  };

  while (bfs())
    for (int u = 0; u < n_left; ++u)
      if (match_l[static_cast<std::size_t>(u)] < 0) dfs(u);
  return match_l;
}

}  // namespace

double pcost(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y, double p) {
  if (p == 2.0) return (x - y).squaredNorm();
  const double n = (x - y).norm();
  if (p == 1.0) return n;
  return std::pow(n, p);
}

// ---------------------------------------------------------------------------
// Coupling

Coupling::Coupling(std::shared_ptr<const DiscreteMeasure> source, std::shared_ptr<const DiscreteMeasure> target,
                   std::vector<CouplingEntry> entries)
    : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {
  if (!source_ || !target_) throw std::invalid_argument("Coupling: null measure");
  std::sort(entries_.begin(), entries_.end(),
            [](const CouplingEntry& a, const CouplingEntry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  for (const auto& e : entries_) {
    if (e.i < 0 || e.i >= source_->size() || e.j < 0 || e.j >= target_->size())
      throw std::invalid_argument("Coupling: index out of range");
    if (!(e.mass >= 0.0)) throw std::invalid_argument("Coupling: negative or NaN mass");
  }
  const double src_err = (source_marginal() - source_->weights()).cwiseAbs().maxCoeff();
  const double tgt_err = (target_marginal() - target_->weights()).cwiseAbs().maxCoeff();
  if (src_err > kMarginalTol || tgt_err > kMarginalTol) {
    std::ostringstream os;
    os << "Coupling: marginal mismatch (source " << src_err << ", target " << tgt_err << ")";
    throw std::invalid_argument(os.str());
  }
}

Vec Coupling::source_marginal() const {
  Vec m = Vec::Zero(source_->size());
  for (const auto& e : entries_) m[e.i] += e.mass;
  return m;
}

Vec Coupling::target_marginal() const {
  Vec m = Vec::Zero(target_->size());
  for (const auto& e : entries_) m[e.j] += e.mass;
  return m;
}

double Coupling::cost(double p) const {
  double c = 0.0;
  for (const auto& e : entries_) c += e.mass * pcost(source_->point(e.i), target_->point(e.j), p);
  return c;
}

double Coupling::max_distance() const {
  double d = 0.0;
  for (const auto& e : entries_)
    if (e.mass > 0.0) d = std::max(d, (source_->point(e.i) - target_->point(e.j)).norm());
  return d;
}

// ---------------------------------------------------------------------------
// Exact solver

Vec c_transform(const Vec& phi, const Mat& sources, const Mat& targets, double p) {
  if (phi.size() != sources.cols()) throw std::invalid_argument("c_transform: size mismatch");
  Vec out(targets.cols());
  for (Index j = 0; j < targets.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < sources.cols(); ++i) best = std::min(best, pcost(sources.col(i), targets.col(j), p) - phi[i]);
    out[j] = best;
  }
  return out;
}

TransportSolution solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  check_pair(mu, nu, "solve_transport");
  if (!(p >= 1.0)) throw std::invalid_argument("solve_transport: p must be >= 1");

  const auto src_idx = positive_indices(mu.weights());
  const auto tgt_idx = positive_indices(nu.weights());
  const std::size_t n = src_idx.size();
  const std::size_t m = tgt_idx.size();

  std::vector<double> cost(n * m);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < m; ++b) cost[a * m + b] = pcost(mu.point(src_idx[a]), nu.point(tgt_idx[b]), p);

  const Scaled s = scale_pair(gather(mu.weights(), src_idx), gather(nu.weights(), tgt_idx));
  detail::TransportSimplex simplex(s.supply, s.demand, cost);
  if (simplex.run() != detail::TransportSimplex::Status::kOptimal)
    throw std::logic_error("solve_transport: network simplex reported infeasibility");

  std::vector<CouplingEntry> entries;
  const double scale = static_cast<double>(s.total);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (const auto f = simplex.flow(a, b); f > 0)
        entries.push_back({src_idx[a], tgt_idx[b], static_cast<double>(f) / scale});

  // Rebuild the exact marginals' masses: integer scaling is exact for
  // uniform weights; otherwise the per-atom rounding error is at most 1e-12.
  auto src = std::make_shared<const DiscreteMeasure>(mu);
  auto tgt = std::make_shared<const DiscreteMeasure>(nu);
  Coupling coupling(src, tgt, std::move(entries));
  const double value = coupling.cost(p);

  // Duals: simplex potentials give c_ij - phi_i - phi_c_j >= -eps; shift to
  // small magnitudes, then polish with a double c-transform over all points
  // (zero-weight atoms included), which restores exact dual feasibility.
  Vec phi_kept(static_cast<Index>(n));
  for (std::size_t a = 0; a < n; ++a) phi_kept[static_cast<Index>(a)] = -simplex.source_potential(a);
  phi_kept.array() -= phi_kept.mean();
  Mat kept_pts(mu.dim(), static_cast<Index>(n));
  for (std::size_t a = 0; a < n; ++a) kept_pts.col(static_cast<Index>(a)) = mu.point(src_idx[a]);
  Vec phi_c = c_transform(phi_kept, kept_pts, nu.points(), p);
  Vec phi = c_transform(phi_c, nu.points(), mu.points(), p);
  phi_c = c_transform(phi, mu.points(), nu.points(), p);

  const double dual_value = phi.dot(mu.weights()) + phi_c.dot(nu.weights());
  return {std::move(coupling), value, {std::move(phi), std::move(phi_c), p}, dual_value};
}

double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  const double v = solve_transport(mu, nu, p).value;
  return std::pow(std::max(v, 0.0), 1.0 / p);
}

// ---------------------------------------------------------------------------
// Bottleneck

BottleneckSolution bottleneck_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_pair(mu, nu, "bottleneck_transport");
  const auto src_idx = positive_indices(mu.weights());
  const auto tgt_idx = positive_indices(nu.weights());
  const std::size_t n = src_idx.size();
  const std::size_t m = tgt_idx.size();

  std::vector<double> dist(n * m);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < m; ++b) dist[a * m + b] = (mu.point(src_idx[a]) - nu.point(tgt_idx[b])).norm();
  std::vector<double> levels = dist;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const Vec wa = gather(mu.weights(), src_idx);
  const Vec wb = gather(nu.weights(), tgt_idx);
  const bool matching = n == m && is_uniform(wa) && is_uniform(wb);
  const Scaled s = scale_pair(wa, wb);

  // Feasibility at threshold t; fills `entries` when feasible.
  auto feasible = [&](double t, std::vector<CouplingEntry>* entries) {
    if (matching) {
      std::vector<std::vector<int>> adj(n);
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < m; ++b)
          if (dist[a * m + b] <= t) adj[a].push_back(static_cast<int>(b));
      const auto match = hopcroft_karp(adj, static_cast<int>(m));
      if (std::any_of(match.begin(), match.end(), [](int v) { return v < 0; })) return false;
      if (entries)
        for (std::size_t a = 0; a < n; ++a)
          entries->push_back({src_idx[a], tgt_idx[static_cast<std::size_t>(match[a])], 1.0 / static_cast<double>(n)});
      return true;
    }
    const int source = static_cast<int>(n + m);
    const int sink = source + 1;
    Dinic g(sink + 1);
    for (std::size_t a = 0; a < n; ++a) g.add_edge(source, static_cast<int>(a), s.supply[a]);
    for (std::size_t b = 0; b < m; ++b) g.add_edge(static_cast<int>(n + b), sink, s.demand[b]);
    std::vector<std::pair<int, std::size_t>> arcs;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (dist[a * m + b] <= t)
          arcs.emplace_back(g.add_edge(static_cast<int>(a), static_cast<int>(n + b), s.total), a * m + b);
    if (g.max_flow(source, sink) != s.total) return false;
    if (entries)
      for (const auto& [e, ab] : arcs)
        if (const auto f = g.flow_on(e); f > 0)
          entries->push_back({src_idx[ab / m], tgt_idx[ab % m], static_cast<double>(f) / static_cast<double>(s.total)});
    return true;
  };

  std::size_t lo = 0;
  std::size_t hi = levels.size() - 1;  // always feasible: complete graph
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (feasible(levels[mid], nullptr)) hi = mid;
    else lo = mid + 1;
  }
  std::vector<CouplingEntry> entries;
  feasible(levels[lo], &entries);
  Coupling coupling(std::make_shared<const DiscreteMeasure>(mu), std::make_shared<const DiscreteMeasure>(nu),
                    std::move(entries));
  return {std::move(coupling), levels[lo]};
}

void write_coupling_csv(std::ostream& os, const Coupling& coupling, double p) {
  os << "i,j,mass,cost\n";
  for (const auto& e : coupling.entries())
    os << e.i << ',' << e.j << ',' << format_double(e.mass) << ','
       << format_double(pcost(coupling.source().point(e.i), coupling.target().point(e.j), p)) << '\n';
}

}  // namespace pushstab
