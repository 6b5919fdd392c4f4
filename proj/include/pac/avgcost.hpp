#pragma once

#include "pac/cost.hpp"
#include "pac/model.hpp"
#include "pac/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pac {

/// Row-wise expectation of transition costs: element m is sum_k P(m,k)*C(m,k).
Vector one_stage_expected(const Matrix& P, const Matrix& C);

/// Long-run expected average cost J = beta . k.
double average_cost(const RowVector& beta, const Vector& k);

struct PolicyEvaluation {
  std::uint64_t policy_id = 0;  // 1-based canonical id; 0 for ad-hoc composite policies
  RowVector beta;
  std::vector<Vector> k_sub;
  Vector k_sys;
  std::vector<double> J_sub;
  double J_sys = 0.0;
};

PolicyEvaluation evaluate_policy(const CompositeSystem& sys, const FactoredPolicy& p,
                                 std::uint64_t policy_id = 0);

/// Composite policies that factor are routed through the factored fast path,
/// so a lifted policy evaluates bit-identically to its factored original.
PolicyEvaluation evaluate_policy(const CompositeSystem& sys, const CompositePolicy& p);

struct Objective {
  enum class Kind { System, Subsystem };
  Kind kind = Kind::System;
  int subsystem = 0;  // 0-based, used when kind == Subsystem

  static Objective system() { return {}; }
  static Objective sub(int i) { return {Kind::Subsystem, i}; }
};

struct RankedEvaluations {
  std::vector<PolicyEvaluation> canonical;  // by policy id
  std::vector<std::size_t> order;           // positions into canonical, ascending objective
  Objective objective;

  const PolicyEvaluation& best() const { return canonical[order.front()]; }
  /// CSV export: header policy,J_sub1,...,J_subN,J_system; canonical order.
  std::string to_csv() const;
};

/// Evaluates every factored policy and ranks by the chosen objective,
/// ascending, ties broken by lowest policy id.
RankedEvaluations enumerate_and_rank(const CompositeSystem& sys, Objective obj = Objective::system());

struct RviResult {
  CompositePolicy policy;
  double gain = 0.0;
  std::uint64_t iterations = 0;
};

/// Average-cost relative value iteration over composite states and admissible
/// joint actions, with the aperiodicity transform P <- (1-tau) I + tau P
/// (tau = 0.9), which leaves stationary distributions and gains unchanged.
/// Greedy ties go to the lowest joint-action index.
RviResult relative_value_iteration(const CompositeSystem& sys, double tol = 1e-9,
                                   std::uint64_t max_iter = 1'000'000);

/// Empirical average of sampled transition costs over a horizon of T steps.
/// Deterministic given the seed; the initial state is drawn uniformly unless
/// given explicitly.
double simulate(const CompositeSystem& sys, const CompositePolicy& p, std::uint64_t horizon,
                std::uint64_t seed, std::optional<Index> initial_state = std::nullopt);
double simulate(const CompositeSystem& sys, const FactoredPolicy& p, std::uint64_t horizon,
                std::uint64_t seed, std::optional<Index> initial_state = std::nullopt);

}  // namespace pac
