#pragma once

#include "pac/model.hpp"
#include "pac/types.hpp"

#include <vector>

namespace pac {

/// Transition-cost matrices over composite (state, next-state) pairs for a
/// fixed policy: one per subsystem plus one for the whole system.
struct CostMatrices {
  std::vector<Matrix> subsystem;
  Matrix system;
};

/// Produces per-subsystem and system transition costs for composite moves
/// m -> k under a joint action. Implementations must be pure.
class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual double subsystem_cost(const CompositeSystem& sys, int i, Index m, Index k,
                                const JointAction& u) const = 0;
  virtual double system_cost(const CompositeSystem& sys, Index m, Index k,
                             const JointAction& u) const = 0;
};

CostMatrices build_cost_matrices(const CompositeSystem& sys, const CompositePolicy& p);
CostMatrices build_cost_matrices(const CompositeSystem& sys, const FactoredPolicy& p);

}  // namespace pac
