#include "network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace pushstab::detail {

namespace {
constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max();
}

TransportSimplex::TransportSimplex(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                                   const std::vector<double>& cost)
    : n_(supply.size()), m_(demand.size()) {
  if (n_ == 0 || m_ == 0) throw std::invalid_argument("TransportSimplex: empty side");
  if (cost.size() != n_ * m_) throw std::invalid_argument("TransportSimplex: cost size mismatch");
  node_num_ = n_ + m_;
  arc_num_ = n_ * m_;
  all_arc_num_ = arc_num_ + node_num_;
  root_ = node_num_;

  source_.resize(all_arc_num_);
  target_.resize(all_arc_num_);
  cost_.resize(all_arc_num_);
  flow_.assign(all_arc_num_, 0);
  cap_.assign(all_arc_num_, kInf);
  state_.assign(all_arc_num_, kStateLower);

  double max_cost = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < m_; ++j) {
      const std::size_t e = i * m_ + j;
      source_[e] = static_cast<int>(i);
      target_[e] = static_cast<int>(n_ + j);
      cost_[e] = cost[e];
      if (!std::isfinite(cost[e])) throw std::invalid_argument("TransportSimplex: non-finite cost");
      max_cost = std::max(max_cost, std::abs(cost[e]));
    }
  }
  epsilon_ = 1e-11 * (1.0 + max_cost);

  supply_.assign(node_num_ + 1, 0);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    supply_[i] = supply[i];
    total += supply[i];
  }
  for (std::size_t j = 0; j < m_; ++j) {
    supply_[n_ + j] = -demand[j];
    total -= demand[j];
  }
  if (total != 0) throw std::invalid_argument("TransportSimplex: unbalanced supply and demand");

  const std::size_t node_slots = node_num_ + 1;
  pi_.assign(node_slots, 0.0);
  parent_.assign(node_slots, -1);
  pred_.assign(node_slots, -1);
  thread_.assign(node_slots, 0);
  rev_thread_.assign(node_slots, 0);
  succ_num_.assign(node_slots, 0);
  last_succ_.assign(node_slots, 0);
  pred_dir_.assign(node_slots, 0);

  const double art_cost = (max_cost + 1.0) * static_cast<double>(node_num_);
  const int root = static_cast<int>(root_);
  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root;
  succ_num_[root_] = static_cast<int>(node_num_ + 1);
  last_succ_[root_] = root - 1;
  supply_[root_] = 0;
  pi_[root_] = 0.0;

  for (std::size_t u = 0, e = arc_num_; u != node_num_; ++u, ++e) {
    const int ui = static_cast<int>(u);
    parent_[u] = root;
    pred_[u] = static_cast<int>(e);
    thread_[u] = ui + 1;
    rev_thread_[u + 1] = ui;
    succ_num_[u] = 1;
    last_succ_[u] = ui;
    state_[e] = kStateTree;
    if (supply_[u] >= 0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0.0;
      source_[e] = ui;
      target_[e] = root;
      flow_[e] = supply_[u];
      cost_[e] = 0.0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost;
      source_[e] = root;
      target_[e] = ui;
      flow_[e] = -supply_[u];
      cost_[e] = art_cost;
    }
  }

  block_size_ = std::max<std::size_t>(static_cast<std::size_t>(std::sqrt(static_cast<double>(arc_num_))), 10);
}

bool TransportSimplex::find_entering_arc() {
  double min = -epsilon_;
  std::size_t cnt = block_size_;
  int best = -1;
  std::size_t e = next_arc_;
  for (std::size_t k = 0; k < arc_num_; ++k) {
    const double c = state_[e] * reduced_cost(e);
    if (c < min) {
      min = c;
      best = static_cast<int>(e);
    }
    ++e;
    if (e == arc_num_) e = 0;
    if (--cnt == 0) {
      if (best >= 0) break;
      cnt = block_size_;
    }
  }
  if (best < 0) return false;
  in_arc_ = best;
  next_arc_ = e;
  return true;
}

void TransportSimplex::find_join_node() {
  int u = source_[static_cast<std::size_t>(in_arc_)];
  int v = target_[static_cast<std::size_t>(in_arc_)];
  while (u != v) {
    if (succ_num_[static_cast<std::size_t>(u)] < succ_num_[static_cast<std::size_t>(v)])
      u = parent_[static_cast<std::size_t>(u)];
    else
      v = parent_[static_cast<std::size_t>(v)];
  }
  join_ = u;
}

bool TransportSimplex::find_leaving_arc() {
  const auto in = static_cast<std::size_t>(in_arc_);
  int first;
  int second;
  if (state_[in] == kStateLower) {
    first = source_[in];
    second = target_[in];
  } else {
    first = target_[in];
    second = source_[in];
  }
  delta_ = cap_[in];
  int result = 0;
  for (int u = first; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto e = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)]);
    std::int64_t d = flow_[e];
    if (pred_dir_[static_cast<std::size_t>(u)] == kDirDown) d = cap_[e] >= kInf ? kInf : cap_[e] - d;
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
    const auto e = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u)]);
    std::int64_t d = flow_[e];
    if (pred_dir_[static_cast<std::size_t>(u)] == kDirUp) d = cap_[e] >= kInf ? kInf : cap_[e] - d;
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void TransportSimplex::change_flow(bool change) {
  const auto in = static_cast<std::size_t>(in_arc_);
  if (delta_ > 0) {
    const std::int64_t val = state_[in] * delta_;
    flow_[in] += val;
    for (int u = source_[in]; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[uu])] -= pred_dir_[uu] * val;
    }
    for (int u = target_[in]; u != join_; u = parent_[static_cast<std::size_t>(u)]) {
      const auto uu = static_cast<std::size_t>(u);
      flow_[static_cast<std::size_t>(pred_[uu])] += pred_dir_[uu] * val;
    }
  }
  if (change) {
    state_[in] = kStateTree;
    const auto out = static_cast<std::size_t>(pred_[static_cast<std::size_t>(u_out_)]);
    state_[out] = flow_[out] == 0 ? kStateLower : kStateUpper;
  } else {
    state_[in] = static_cast<signed char>(-state_[in]);
  }
}

void TransportSimplex::update_tree_structure() {
  auto at = [](std::vector<int>& v, int i) -> int& { return v[static_cast<std::size_t>(i)]; };

  const int old_rev_thread = at(rev_thread_, u_out_);
  const int old_succ_num = at(succ_num_, u_out_);
  const int old_last_succ = at(last_succ_, u_out_);
  v_out_ = at(parent_, u_out_);

  if (u_in_ == u_out_) {
    at(parent_, u_in_) = v_in_;
    at(pred_, u_in_) = in_arc_;
    pred_dir_[static_cast<std::size_t>(u_in_)] =
        u_in_ == source_[static_cast<std::size_t>(in_arc_)] ? kDirUp : kDirDown;

    if (at(thread_, v_in_) != u_out_) {
      int after = at(thread_, old_last_succ);
      at(thread_, old_rev_thread) = after;
      at(rev_thread_, after) = old_rev_thread;
      after = at(thread_, v_in_);
      at(thread_, v_in_) = u_out_;
      at(rev_thread_, u_out_) = v_in_;
      at(thread_, old_last_succ) = after;
      at(rev_thread_, after) = old_last_succ;
    }
  } else {
    const int thread_continue = old_rev_thread == v_in_ ? at(thread_, old_last_succ) : at(thread_, v_in_);

    int stem = u_in_;
    int par_stem = v_in_;
    int next_stem;
    int last = at(last_succ_, u_in_);
    int before;
    int after = at(thread_, last);
    at(thread_, v_in_) = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = at(parent_, stem);
      at(thread_, last) = next_stem;
      dirty_revs_.push_back(last);

      before = at(rev_thread_, stem);
      at(thread_, before) = after;
      at(rev_thread_, after) = before;

      at(parent_, stem) = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = at(last_succ_, stem) == at(last_succ_, par_stem) ? at(rev_thread_, par_stem) : at(last_succ_, stem);
      after = at(thread_, last);
    }
    at(parent_, u_out_) = par_stem;
    at(thread_, last) = thread_continue;
    at(rev_thread_, thread_continue) = last;
    at(last_succ_, u_out_) = last;

    if (old_rev_thread != v_in_) {
      at(thread_, old_rev_thread) = after;
      at(rev_thread_, after) = old_rev_thread;
    }

    for (int u : dirty_revs_) at(rev_thread_, at(thread_, u)) = u;

    int tmp_sc = 0;
    const int tmp_ls = at(last_succ_, u_out_);
    for (int u = u_out_, p = at(parent_, u); u != u_in_; u = p, p = at(parent_, u)) {
      at(pred_, u) = at(pred_, p);
      pred_dir_[static_cast<std::size_t>(u)] = static_cast<signed char>(-pred_dir_[static_cast<std::size_t>(p)]);
      tmp_sc += at(succ_num_, u) - at(succ_num_, p);
      at(succ_num_, u) = tmp_sc;
      at(last_succ_, p) = tmp_ls;
    }
    at(pred_, u_in_) = in_arc_;
    pred_dir_[static_cast<std::size_t>(u_in_)] =
        u_in_ == source_[static_cast<std::size_t>(in_arc_)] ? kDirUp : kDirDown;
    at(succ_num_, u_in_) = old_succ_num;
  }

  const int up_limit_out = at(last_succ_, join_) == v_in_ ? join_ : -1;
  const int last_succ_out = at(last_succ_, u_out_);
  for (int u = v_in_; u != -1 && at(last_succ_, u) == v_in_; u = at(parent_, u)) at(last_succ_, u) = last_succ_out;

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && at(last_succ_, u) == old_last_succ; u = at(parent_, u))
      at(last_succ_, u) = old_rev_thread;
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && at(last_succ_, u) == old_last_succ; u = at(parent_, u))
      at(last_succ_, u) = last_succ_out;
  }

  for (int u = v_in_; u != join_; u = at(parent_, u)) at(succ_num_, u) += old_succ_num;
  for (int u = v_out_; u != join_; u = at(parent_, u)) at(succ_num_, u) -= old_succ_num;
}

void TransportSimplex::update_potential() {
  const auto in = static_cast<std::size_t>(in_arc_);
  const auto u_in = static_cast<std::size_t>(u_in_);
  const double sigma = pi_[static_cast<std::size_t>(v_in_)] - pi_[u_in] - pred_dir_[u_in] * cost_[in];
  const int end = thread_[static_cast<std::size_t>(last_succ_[u_in])];
  for (int u = u_in_; u != end; u = thread_[static_cast<std::size_t>(u)]) pi_[static_cast<std::size_t>(u)] += sigma;
}

TransportSimplex::Status TransportSimplex::run() {
  while (find_entering_arc()) {
    find_join_node();
    const bool change = find_leaving_arc();
    if (delta_ >= kInf) throw std::logic_error("TransportSimplex: unbounded cycle");
    change_flow(change);
    if (change) {
      update_tree_structure();
      update_potential();
    }
    ++pivots_;
  }
  for (std::size_t e = arc_num_; e < all_arc_num_; ++e)
    if (flow_[e] != 0) return Status::kInfeasible;
  return Status::kOptimal;
}

}  // namespace pushstab::detail
