#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "pushstab/measures.hpp"

namespace pushstab {

struct CouplingEntry {
  Index i;
  Index j;
  double mass;
};

/// Sparse transport plan between two discrete measures. Entries are sorted
/// by (i, j); marginals match the source and target weights within 1e-10.
class Coupling {
 public:
  Coupling(std::shared_ptr<const DiscreteMeasure> source, std::shared_ptr<const DiscreteMeasure> target,
           std::vector<CouplingEntry> entries);

  const DiscreteMeasure& source() const { return *source_; }
  const DiscreteMeasure& target() const { return *target_; }
  std::shared_ptr<const DiscreteMeasure> source_ptr() const { return source_; }
  std::shared_ptr<const DiscreteMeasure> target_ptr() const { return target_; }
  const std::vector<CouplingEntry>& entries() const { return entries_; }

  Vec source_marginal() const;
  Vec target_marginal() const;
  /// sum m_ij |x_i - y_j|^p
  double cost(double p) const;
  /// Largest |x_i - y_j| over the support.
  double max_distance() const;

 private:
  std::shared_ptr<const DiscreteMeasure> source_;
  std::shared_ptr<const DiscreteMeasure> target_;
  std::vector<CouplingEntry> entries_;
};

/// Kantorovich potentials: phi[i] + phi_c[j] <= |x_i - y_j|^p.
struct DualPotentials {
  Vec phi;
  Vec phi_c;
  double p;
};

struct TransportSolution {
  Coupling coupling;
  double value;  // optimal total cost; W_p = value^(1/p)
  DualPotentials duals;
  double dual_value;
};

/// |x - y|^p with p = 2 and p = 1 special-cased.
double pcost(const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& y, double p);

/// Exact discrete optimal transport for the cost |x - y|^p.
TransportSolution solve_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

/// W_p(mu, nu) via solve_transport.
double wasserstein(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

struct BottleneckSolution {
  Coupling coupling;
  double value;  // W_inf
};

/// min over couplings of the largest transported Euclidean distance.
BottleneckSolution bottleneck_transport(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// phi^c(y_j) = min_i |x_i - y_j|^p - phi_i.
Vec c_transform(const Vec& phi, const Mat& sources, const Mat& targets, double p);

/// Header "i,j,mass,cost", one row per entry in (i, j) order.
void write_coupling_csv(std::ostream& os, const Coupling& coupling, double p);

}  // namespace pushstab
