#pragma once

#include "pac/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pac {

class CostModel;

/// One controlled subsystem: finite states, finite action labels, and
/// per-(state, action) transition rows plus real-valued output entries.
///
/// transition[u](x, x') is the probability of moving x -> x' under action u;
/// output[u](x, x') is the scenario-unit output realized on that move.
struct SubsystemModel {
  int id = 0;  // 1-based position within the composite system
  int num_states = 0;
  std::vector<std::string> actions;
  std::vector<Matrix> transition;
  std::vector<Matrix> output;
  std::vector<std::vector<int>> admissible;  // per state, sorted action indices

  int num_actions() const { return static_cast<int>(actions.size()); }
  double prob(int x, int u, int xp) const { return transition[u](x, xp); }
  double out(int x, int u, int xp) const { return output[u](x, xp); }

  /// Transition matrix induced by the per-state action choice mu.
  Matrix policy_matrix(std::span<const int> mu) const;
  Matrix output_matrix(std::span<const int> mu) const;

  /// Shape checks; throws std::invalid_argument on malformed dimensions or
  /// out-of-range admissible actions. Value-level invariants are reported by
  /// validate() and enforced where the solvers need them.
  void check() const;
};

/// Bijection between per-subsystem state tuples and composite state indices.
/// Mixed-radix with the last subsystem varying fastest, matching the order of
/// the Kronecker product P_(1) (x) ... (x) P_(N).
class CompositeIndexer {
 public:
  CompositeIndexer() = default;
  explicit CompositeIndexer(std::vector<int> sizes);

  Index size() const { return total_; }
  int num_subsystems() const { return static_cast<int>(sizes_.size()); }

  Index to_index(std::span<const int> states) const;
  StateTuple to_states(Index m) const;
  int state_of(Index m, int subsystem) const;

 private:
  std::vector<int> sizes_;
  std::vector<Index> strides_;
  Index total_ = 0;
};

enum class Group { Minor, Principal };

/// Per-subsystem stationary maps state -> admissible action.
struct FactoredPolicy {
  std::vector<std::vector<int>> action;  // [subsystem][state]
};

/// General stationary map composite state -> joint action.
struct CompositePolicy {
  std::vector<JointAction> action;  // [composite state]
};

/// An ordered collection of subsystems with a shared cost model.
/// Immutable after construction; safe to share across threads.
struct CompositeSystem {
  CompositeSystem(std::vector<SubsystemModel> subsystems_,
                  std::shared_ptr<const CostModel> cost_model_,
                  std::vector<Group> group_labels_ = {},
                  Index composite_cap = kDefaultCompositeCap,
                  std::uint64_t enumeration_cap = kDefaultEnumerationCap);

  std::vector<SubsystemModel> subsystems;
  std::shared_ptr<const CostModel> cost_model;
  std::vector<Group> group_labels;
  CompositeIndexer indexer;
  Index composite_cap = kDefaultCompositeCap;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;

  int num_subsystems() const { return static_cast<int>(subsystems.size()); }
  Index num_states() const { return indexer.size(); }

  bool admissible_at(Index m, const JointAction& u) const;
  JointAction joint_action(const FactoredPolicy& p, Index m) const;

  /// Admissible joint actions at composite state m in canonical order
  /// (subsystem 1 slowest, positions within each state's admissible list).
  std::vector<JointAction> admissible_joint_actions(Index m) const;
};

CompositePolicy lift_policy(const FactoredPolicy& p, const CompositeSystem& sys);

/// Inverse of lift_policy where one exists: a composite policy factors iff the
/// action of every subsystem depends only on that subsystem's own state.
std::optional<FactoredPolicy> factor_policy(const CompositePolicy& p, const CompositeSystem& sys);

void check_policy(const CompositeSystem& sys, const FactoredPolicy& p);
void check_policy(const CompositeSystem& sys, const CompositePolicy& p);

/// Streams every admissible factored policy exactly once, in deterministic
/// lexicographic order (subsystem 1 slowest, then its states in order).
/// Construction throws InfeasibleError if the policy count exceeds the cap.
class PolicyEnumerator {
 public:
  explicit PolicyEnumerator(const CompositeSystem& sys);

  std::uint64_t count() const { return count_; }

  /// Canonical policy at 0-based position idx. Policy ids reported elsewhere
  /// are idx + 1.
  FactoredPolicy at(std::uint64_t idx) const;

  template <typename F>
  void for_each(F&& f) const {
    for (std::uint64_t i = 0; i < count_; ++i) f(i, at(i));
  }

 private:
  struct Digit {
    int subsystem, state;
    const std::vector<int>* choices;
  };
  std::vector<Digit> digits_;
  std::vector<int> shape_;  // [subsystem] -> num_states
  std::uint64_t count_ = 0;
};

/// Composite transition matrix for a factored policy via the Kronecker
/// product of the per-subsystem policy matrices.
Matrix composite_transition(const CompositeSystem& sys, const FactoredPolicy& p);

/// Composite transition matrix for a general policy: entry (m,k) is the
/// product of the per-subsystem transition probabilities under the joint
/// action chosen at m.
Matrix composite_transition_general(const CompositeSystem& sys, const CompositePolicy& p);

/// Action-conditioned composite transition row at state m.
Vector action_row(const CompositeSystem& sys, Index m, const JointAction& u);

enum class CheckStatus { Pass, Fail, Skip };

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
  std::string to_text() const;
};

/// Structural and stochastic sanity checks: row-stochasticity, nonempty
/// admissible sets, finite outputs, and a per-policy unichain test done with
/// the stationary solver residual plus a closed-communicating-class count.
/// Never throws; failures are report content.
ValidationReport validate(const CompositeSystem& sys);

}  // namespace pac
