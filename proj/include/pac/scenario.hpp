#pragma once

#include "pac/cost.hpp"
#include "pac/model.hpp"
#include "pac/rng.hpp"
#include "pac/types.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace pac {

enum class SystemCostForm { RatioOfTotals, SumOfSubsystems, WeightedSum, Table };

/// Coupled ratio-cost family: subsystem i receives external input W_i and a
/// fraction z(j,i) of every other subsystem's output, while giving away the
/// fraction z(i,j) of its own. With y_i the output realized on a composite
/// transition,
///   subsystem cost i : (W_i + sum_j z(j,i) y_j) / (y_i + sum_j z(i,j) y_i)
///   system cost      : (sum_i W_i) / (sum_i y_i)            [RatioOfTotals]
/// Alternative system forms aggregate the subsystem costs instead (sum,
/// weighted sum) or read a per-(state, joint action) table.
struct CoupledCostSpec {
  Vector W;
  Matrix z;  // z(i,j), zero diagonal
  SystemCostForm system_form = SystemCostForm::RatioOfTotals;
  Vector weights;  // WeightedSum only
  Matrix table;    // Table only: (composite state) x (canonical joint-action index)
  /// Alternate denominator convention kept for comparison: cross-charges the
  /// other subsystems' denominators with subsystem 1's outgoing transfer
  /// (y_i + z(1,i) y_1) instead of the subsystem's own outgoing share.
  /// Two-subsystem systems only; it does not reproduce the reference tables.
  bool alt_denominator = false;
};

class CoupledCostModel final : public CostModel {
 public:
  explicit CoupledCostModel(CoupledCostSpec spec);

  double subsystem_cost(const CompositeSystem& sys, int i, Index m, Index k,
                        const JointAction& u) const override;
  double system_cost(const CompositeSystem& sys, Index m, Index k,
                     const JointAction& u) const override;

  const CoupledCostSpec& spec() const { return spec_; }

 private:
  double output_of(const CompositeSystem& sys, int i, Index m, Index k, const JointAction& u) const;
  CoupledCostSpec spec_;
};

std::shared_ptr<const CostModel> make_coupled_cost_model(CoupledCostSpec spec);

/// Built-in two-subsystem example (the `paper` scenario of the CLI): two
/// 2-state / 2-action subsystems of a minor group with coupled ratio costs,
/// W = (15, 16), z(1,2) = 0.25, z(2,1) = 0.43.
CompositeSystem paper_example();

/// Distance of a policy's stacked one-stage expected costs from the utopia
/// point, rho = ||f - f^s||.
double rho(const CompositeSystem& sys, const CompositePolicy& p, Norm norm = Norm::Euclidean);
double rho(const CompositeSystem& sys, const FactoredPolicy& p, Norm norm = Norm::Euclidean);

/// Uniform sampling range for the outputs of one (subsystem, action) pair.
/// sample == false keeps the base scenario's output entries untouched.
struct OutputRange {
  double lo = 0.0;
  double hi = 0.0;
  bool sample = true;
};

/// Replication study over the built-in scenario: outputs are redrawn per
/// replication from per-(subsystem, action) uniform ranges; transitions stay
/// fixed unless randomize_transitions resamples each row from the simplex.
struct ReplicationConfig {
  int reps = 1000;
  std::vector<std::vector<OutputRange>> ranges;  // empty -> built-in defaults
  std::uint64_t master_seed = 0;
  bool randomize_transitions = false;
  Norm norm = Norm::Euclidean;

  static std::vector<std::vector<OutputRange>> default_ranges();
};

struct ReplicationRow {
  int rep = 0;  // 1-based
  std::uint64_t seed = 0;
  double J_pareto = 0.0, J_opt = 0.0, dJ = 0.0;
  double rho_pareto = 0.0, rho_opt = 0.0, drho = 0.0;
  bool argmin_rho_is_pareto = false;
  bool skipped = false;
  std::string error;
};

struct ReplicationReport {
  int reps = 0;
  std::uint64_t master_seed = 0;
  std::vector<ReplicationRow> rows;
  int violations_J = 0;       // dJ > 1e-9
  int violations_rho = 0;     // drho > 1e-9
  int violations_argmin = 0;  // min_pi rho(pi) not attained by the J-optimal policy
  int skipped = 0;

  std::string to_csv() const;
  std::string histogram_csv(int bins = 20) const;
};

/// Deterministic: replication r uses the stream seeded master xor r, and an
/// identical config reproduces identical report bytes.
ReplicationReport replicate(const ReplicationConfig& config);

/// One draw of the randomized family: outputs resampled from the ranges
/// (subsystem-major, then action, state, next state), then transition rows
/// from the simplex when requested. Pure function of the rng stream state.
CompositeSystem sample_scenario(const CompositeSystem& base,
                                const std::vector<std::vector<OutputRange>>& ranges,
                                bool randomize_transitions, CounterRng& rng);

/// Scenario JSON (all indices 1-based on the wire):
/// {
///   "subsystems": [{"num_states": 2, "actions": ["a","b"],
///                   "transition": [[[..],..],..],   // [x][u][x']
///                   "output":     [[[..],..],..],   // [x][u][x']
///                   "admissible": [[1,2],[1]]}, ...],   // optional
///   "cost": {"form": "coupled", "W": [..], "z": [[..],..],
///            "system": "ratio"|"sum"|{"weighted":[..]}|{"table":[[..],..]},
///            "alt_denominator": false},
///   "groups": ["minor","principal", ...]   // optional
/// }
CompositeSystem scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const CompositeSystem& sys);
CompositeSystem load_scenario(const std::string& path);

}  // namespace pac
