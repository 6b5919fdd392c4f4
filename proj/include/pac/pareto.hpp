#pragma once

#include "pac/model.hpp"
#include "pac/types.hpp"

#include <string>
#include <vector>

namespace pac {

/// One-stage expected costs of a joint action at a composite state: the
/// per-subsystem objective vector plus the scalar system cost, both taken
/// against the action-conditioned transition row.
struct StageCostPoint {
  Index state = 0;
  JointAction action;
  Vector per_subsystem;
  double system = 0.0;
};

StageCostPoint stage_costs(const CompositeSystem& sys, Index m, const JointAction& u);

/// Stage-cost points of every admissible joint action at m, canonical order.
std::vector<StageCostPoint> stage_points(const CompositeSystem& sys, Index m);

/// a dominates b under componentwise <= with at least one strict inequality
/// (minimization). Exact comparisons, no epsilon.
bool dominates(const Vector& a, const Vector& b);

/// Nondominated stage-cost points at state m; never empty when at least one
/// admissible joint action exists.
std::vector<StageCostPoint> pareto_frontier(const CompositeSystem& sys, Index m);

struct StateSelection {
  std::vector<StageCostPoint> points;    // all admissible actions
  std::vector<bool> on_frontier;         // aligned with points
  std::size_t selected = 0;              // position into points
  bool selected_on_frontier = false;
};

struct ParetoReport {
  CompositePolicy policy;
  std::vector<StateSelection> states;

  bool all_selected_on_frontier() const;
  /// CSV export: state,action_tuple,k_sub1..k_subN,k_system,on_frontier,selected.
  std::string to_csv(const CompositeSystem& sys) const;
};

/// Pareto control policy: at each state, the admissible joint action with the
/// minimum system one-stage expected cost; ties broken by lowest joint-action
/// index. The report keeps every state's frontier so the nondominance of the
/// selection can be audited.
ParetoReport pareto_policy(const CompositeSystem& sys);

enum class GroupMode { MinorMax, PrincipalMin };

/// Per-state componentwise optimum of the subsystem objective vector:
/// maximization for an all-minor group, minimization for all-principal.
/// Throws NoComponentwiseOptimumError when the objectives conflict at some
/// state and no single action optimizes every component.
CompositePolicy group_policy(const CompositeSystem& sys, GroupMode mode);

/// Stacked per-objective minima, state-major subsystem-minor: element
/// m*N + i is min over admissible u of the subsystem-i stage cost at state m.
Vector utopia_point(const CompositeSystem& sys);

/// Stacked stage costs of a policy in the utopia_point ordering.
Vector stacked_stage_costs(const CompositeSystem& sys, const CompositePolicy& p);

}  // namespace pac
