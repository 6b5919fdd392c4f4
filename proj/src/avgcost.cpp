#include "pac/avgcost.hpp"

#include "pac/rng.hpp"
#include "pac/stationary.hpp"
#include "pac/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pac {

namespace {

CostMatrices build_cost_matrices_impl(const CompositeSystem& sys,
                                      const std::function<const JointAction&(Index)>& action_at) {
  if (!sys.cost_model) throw std::invalid_argument("composite system has no cost model");
  const Index n = sys.num_states();
  const int N = sys.num_subsystems();
  CostMatrices out;
  out.subsystem.assign(N, Matrix(n, n));
  out.system.resize(n, n);
  for (Index m = 0; m < n; ++m) {
    const JointAction& u = action_at(m);
    for (Index k = 0; k < n; ++k) {
      for (int i = 0; i < N; ++i) out.subsystem[i](m, k) = sys.cost_model->subsystem_cost(sys, i, m, k, u);
      out.system(m, k) = sys.cost_model->system_cost(sys, m, k, u);
    }
  }
  return out;
}

PolicyEvaluation evaluate_with(const Matrix& P, const RowVector& beta,
                               const CostMatrices& C, std::uint64_t policy_id) {
  PolicyEvaluation ev;
  ev.policy_id = policy_id;
  ev.beta = beta;
  ev.k_sys = one_stage_expected(P, C.system);
  ev.J_sys = average_cost(beta, ev.k_sys);
  for (const auto& Ci : C.subsystem) {
    ev.k_sub.push_back(one_stage_expected(P, Ci));
    ev.J_sub.push_back(average_cost(beta, ev.k_sub.back()));
  }
  return ev;
}

double objective_of(const PolicyEvaluation& ev, Objective obj) {
  return obj.kind == Objective::Kind::System ? ev.J_sys : ev.J_sub[obj.subsystem];
}

}  // namespace

CostMatrices build_cost_matrices(const CompositeSystem& sys, const CompositePolicy& p) {
  check_policy(sys, p);
  return build_cost_matrices_impl(sys, [&](Index m) -> const JointAction& { return p.action[m]; });
}

CostMatrices build_cost_matrices(const CompositeSystem& sys, const FactoredPolicy& p) {
  check_policy(sys, p);
  std::vector<JointAction> actions;
  actions.reserve(sys.num_states());
  for (Index m = 0; m < sys.num_states(); ++m) actions.push_back(sys.joint_action(p, m));
  return build_cost_matrices_impl(sys, [&](Index m) -> const JointAction& { return actions[m]; });
}

Vector one_stage_expected(const Matrix& P, const Matrix& C) {
  if (P.rows() != C.rows() || P.cols() != C.cols())
    throw std::invalid_argument("transition and cost matrices must have equal shape");
  return P.cwiseProduct(C).rowwise().sum();
}

double average_cost(const RowVector& beta, const Vector& k) {
  if (beta.size() != k.size())
    throw std::invalid_argument("distribution and one-stage cost vector must have equal length");
  return beta.dot(k);
}

PolicyEvaluation evaluate_policy(const CompositeSystem& sys, const FactoredPolicy& p,
                                 std::uint64_t policy_id) {
  const Matrix P = composite_transition(sys, p);
  const RowVector beta = stationary_factored(sys, p);
  return evaluate_with(P, beta, build_cost_matrices(sys, p), policy_id);
}

PolicyEvaluation evaluate_policy(const CompositeSystem& sys, const CompositePolicy& p) {
  if (auto factored = factor_policy(p, sys)) return evaluate_policy(sys, *factored);
  const Matrix P = composite_transition_general(sys, p);
  const RowVector beta = stationary_direct(P);
  return evaluate_with(P, beta, build_cost_matrices(sys, p), 0);
}

RankedEvaluations enumerate_and_rank(const CompositeSystem& sys, Objective obj) {
  const PolicyEnumerator en(sys);
  RankedEvaluations out;
  out.objective = obj;
  out.canonical.resize(en.count());
  parallel_for(en.count(), [&](std::size_t idx) {
    out.canonical[idx] = evaluate_policy(sys, en.at(idx), idx + 1);
  });
  out.order.resize(en.count());
  std::iota(out.order.begin(), out.order.end(), std::size_t{0});
  std::stable_sort(out.order.begin(), out.order.end(), [&](std::size_t a, std::size_t b) {
    return objective_of(out.canonical[a], obj) < objective_of(out.canonical[b], obj);
  });
  return out;
}

std::string RankedEvaluations::to_csv() const {
  const int N = canonical.empty() ? 0 : static_cast<int>(canonical.front().J_sub.size());
  std::ostringstream os;
  os << "policy";
  for (int i = 1; i <= N; ++i) os << ",J_sub" << i;
  os << ",J_system\n";
  for (const auto& ev : canonical) {
    os << ev.policy_id;
    for (double j : ev.J_sub) os << ',' << fmt_double(j);
    os << ',' << fmt_double(ev.J_sys) << '\n';
  }
  return os.str();
}

RviResult relative_value_iteration(const CompositeSystem& sys, double tol, std::uint64_t max_iter) {
  constexpr double kTau = 0.9;
  if (!sys.cost_model) throw std::invalid_argument("composite system has no cost model");
  const Index n = sys.num_states();

  // Precompute one-stage expected costs and transformed rows per (m, u).
  std::vector<std::vector<JointAction>> actions(n);
  std::vector<std::vector<double>> stage(n);
  std::vector<std::vector<Vector>> rows(n);
  for (Index m = 0; m < n; ++m) {
    actions[m] = sys.admissible_joint_actions(m);
    if (actions[m].empty())
      throw std::invalid_argument("no admissible joint action at composite state " +
                                  std::to_string(m + 1));
    for (const auto& u : actions[m]) {
      Vector row = action_row(sys, m, u);
      double cost = 0.0;
      for (Index k = 0; k < n; ++k) cost += row(k) * sys.cost_model->system_cost(sys, m, k, u);
      stage[m].push_back(cost);
      Vector transformed = kTau * row;
      transformed(m) += 1.0 - kTau;
      rows[m].push_back(std::move(transformed));
    }
  }

  Vector v = Vector::Zero(n);
  double span = 0.0;
  for (std::uint64_t it = 1; it <= max_iter; ++it) {
    Vector next(n);
    for (Index m = 0; m < n; ++m) {
      double best = stage[m][0] + rows[m][0].dot(v);
      for (std::size_t a = 1; a < actions[m].size(); ++a)
        best = std::min(best, stage[m][a] + rows[m][a].dot(v));
      next(m) = best;
    }
    const Vector diff = next - v;
    const double hi = diff.maxCoeff(), lo = diff.minCoeff();
    span = hi - lo;
    if (hi - lo < tol) {
      RviResult res;
      res.gain = 0.5 * (hi + lo);
      res.iterations = it;
      res.policy.action.reserve(n);
      for (Index m = 0; m < n; ++m) {
        std::size_t best_a = 0;
        double best = stage[m][0] + rows[m][0].dot(v);
        for (std::size_t a = 1; a < actions[m].size(); ++a) {
          const double val = stage[m][a] + rows[m][a].dot(v);
          if (val < best) {
            best = val;
            best_a = a;
          }
        }
        res.policy.action.push_back(actions[m][best_a]);
      }
      return res;
    }
    v = next - Vector::Constant(n, next(0));
  }
  std::ostringstream os;
  os << "relative value iteration did not converge within " << max_iter
     << " iterations (last span " << span << ")";
  throw std::runtime_error(os.str());
}

double simulate(const CompositeSystem& sys, const CompositePolicy& p, std::uint64_t horizon,
                std::uint64_t seed, std::optional<Index> initial_state) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  check_policy(sys, p);
  const Index n = sys.num_states();
  const Matrix P = composite_transition_general(sys, p);
  const CostMatrices C = build_cost_matrices(sys, p);

  CounterRng rng(seed);
  Index m = initial_state ? *initial_state : rng.uniform_index(n);
  if (m < 0 || m >= n) throw std::invalid_argument("initial state out of range");

  double total = 0.0;
  for (std::uint64_t t = 0; t < horizon; ++t) {
    const double u = rng.next_double();
    double acc = 0.0;
    Index next = n - 1;
    for (Index k = 0; k < n; ++k) {
      acc += P(m, k);
      if (u < acc) {
        next = k;
        break;
      }
    }
    total += C.system(m, next);
    m = next;
  }
  return total / static_cast<double>(horizon);
}

double simulate(const CompositeSystem& sys, const FactoredPolicy& p, std::uint64_t horizon,
                std::uint64_t seed, std::optional<Index> initial_state) {
  return simulate(sys, lift_policy(p, sys), horizon, seed, initial_state);
}

}  // namespace pac
