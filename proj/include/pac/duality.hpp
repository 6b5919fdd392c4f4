#pragma once

#include "pac/model.hpp"
#include "pac/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace pac {

/// One policy's point of the min-common/max-crossing set: theta = beta * M
/// (forced to 0 by stationarity, M = P - I) and phi = ||k + M q||.
struct LambdaPoint {
  std::uint64_t policy_id = 0;
  RowVector theta;
  double theta_residual = 0.0;  // ||theta||_inf
  Vector raw;                   // k + M q
  double phi = 0.0;
};

/// Average cost recovered through the stationarity identity
/// psi = beta.(k + M q) = beta.k; computed through the exact same evaluation
/// path as the average-cost module, so the two agree bit-for-bit.
double psi(const CompositeSystem& sys, const FactoredPolicy& p);

/// Throws if the stationarity residual ||beta M||_inf exceeds 1e-8.
LambdaPoint lambda_point(const CompositeSystem& sys, const FactoredPolicy& p, const Vector& q,
                         Norm norm = Norm::Euclidean);

/// L(pi, nu) = phi + theta . nu. Since theta vanishes, L is nu-independent up
/// to the stationarity residual.
double lagrangian(const CompositeSystem& sys, const FactoredPolicy& p, const Vector& q,
                  const Vector& nu, Norm norm = Norm::Euclidean);

struct MinCommonResult {
  std::uint64_t policy_id = 0;
  double phi_star = 0.0;
};

/// Minimizes phi over all factored policies; ties to the lowest policy id.
MinCommonResult min_common(const CompositeSystem& sys, const Vector& q, Norm norm = Norm::Euclidean);

struct MaxCrossingResult {
  double b_star = 0.0;
  Vector certificate_nu;
};

/// Dual value probed over a finite set of hyperplane normals: nu = 0 plus
/// `probes` seeded random directions, each at scales {1, 10, 100}. With every
/// theta = 0 the dual function is nu-independent, so probing is exact up to
/// the stationarity residual.
MaxCrossingResult max_crossing(const CompositeSystem& sys, const Vector& q,
                               Norm norm = Norm::Euclidean, int probes = 128,
                               std::uint64_t seed = 0);

struct PolicyAuditRow {
  std::uint64_t policy_id = 0;
  double psi = 0.0;
  double phi = 0.0;
  double theta_residual = 0.0;
  bool elementwise_ok = false;  // k_pareto <= k + M q holds at every element
  Index first_violation = -1;
};

struct OptimalityAudit {
  double phi_star = 0.0;
  std::uint64_t phi_argmin = 0;
  double b_star = 0.0;
  double weak_duality_margin = 0.0;  // phi_star - b_star
  double pareto_cost = 0.0;          // J of the Pareto policy
  double best_cost = 0.0;            // enumeration minimum of J
  std::uint64_t best_policy = 0;
  double pareto_gap = 0.0;           // pareto_cost - best_cost
  bool pareto_is_lift_of_best = false;
  bool all_elementwise_ok = false;
  bool norm_dominance_ok = false;  // phi(pareto) <= phi(pi) for every pi
  std::vector<PolicyAuditRow> rows;

  /// CSV export: per-policy rows plus one trailing summary row carrying
  /// phi_star, b_star and the Pareto gap.
  std::string to_csv() const;
};

/// Audits the central optimality claim against exhaustive enumeration: the
/// Pareto policy's average-cost gap, the elementwise bound
/// k_pareto <= k + M q per policy, norm dominance of the Pareto point, and
/// the weak-duality margin. Failures are report content, not exceptions.
OptimalityAudit pareto_optimality_audit(const CompositeSystem& sys, const Vector& q,
                                        Norm norm = Norm::Euclidean);

}  // namespace pac
