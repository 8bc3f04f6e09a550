#pragma once

#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>

#include "pushstab/common.hpp"
#include "pushstab/max_affine.hpp"
#include "pushstab/measures.hpp"
#include "pushstab/pushforward.hpp"

namespace pushstab::detail {

// Independent stream per (scenario tag, instance) so results do not depend on
// scheduling.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t i) {
  std::uint64_t z = seed ^ (tag * 0x9E3779B97F4A7C15ULL) ^ (i * 0xBF58476D1CE4E5B9ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw BoundViolation(std::string("non-finite value for ") + what);
}

// grad f # m for a 1D max-affine f, exact: intervals are cut at the kinks and
// each piece lands on one slope; atoms go through the policy.
Measure1D push_1d(const MaxAffineFunction& f, const Measure1D& m, const SelectionPolicy& policy, const Domain& image);

}  // namespace pushstab::detail
