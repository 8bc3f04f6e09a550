#pragma once

#include <cstdint>
#include <vector>

namespace pushstab::detail {

// Primal network simplex for the uncapacitated transportation problem
// between n supply nodes and m demand nodes on the complete bipartite graph.
// Spanning-tree bookkeeping (thread / rev_thread / succ_num / last_succ) and
// the block-search pivot rule follow the classic LEMON design. Flows are
// integers; costs are doubles.
class TransportSimplex {
 public:
  enum class Status { kOptimal, kInfeasible };

  // cost is row-major n x m.
  TransportSimplex(const std::vector<std::int64_t>& supply, const std::vector<std::int64_t>& demand,
                   const std::vector<double>& cost);

  Status run();

  std::int64_t flow(std::size_t i, std::size_t j) const { return flow_[i * m_ + j]; }
  // Node potentials pi with reduced cost c_ij + pi_i - pi_{n+j} >= 0.
  double source_potential(std::size_t i) const { return pi_[i]; }
  double target_potential(std::size_t j) const { return pi_[n_ + j]; }
  std::size_t pivots() const { return pivots_; }

 private:
  static constexpr int kStateUpper = -1;
  static constexpr int kStateTree = 0;
  static constexpr int kStateLower = 1;
  static constexpr int kDirUp = 1;
  static constexpr int kDirDown = -1;

  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();

  double reduced_cost(std::size_t e) const { return cost_[e] + pi_[source_[e]] - pi_[target_[e]]; }

  std::size_t n_;
  std::size_t m_;
  std::size_t node_num_;
  std::size_t arc_num_;      // original arcs
  std::size_t all_arc_num_;  // original + artificial
  std::size_t root_;

  std::vector<int> source_;
  std::vector<int> target_;
  std::vector<double> cost_;
  std::vector<std::int64_t> flow_;
  std::vector<std::int64_t> cap_;
  std::vector<signed char> state_;
  std::vector<std::int64_t> supply_;

  std::vector<double> pi_;
  std::vector<int> parent_;
  std::vector<int> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<int> dirty_revs_;

  // pivot state
  std::size_t block_size_;
  std::size_t next_arc_ = 0;
  double epsilon_;

  int in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  std::int64_t delta_ = 0;
  std::size_t pivots_ = 0;
};

}  // namespace pushstab::detail
