#include "pac/duality.hpp"

#include "pac/avgcost.hpp"
#include "pac/pareto.hpp"
#include "pac/rng.hpp"
#include "pac/stationary.hpp"
#include "pac/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pac {

namespace {

struct PolicyDualData {
  PolicyEvaluation ev;
  RowVector theta;
  Vector raw;  // k + M q
  double phi = 0.0;
  double theta_residual = 0.0;
};

PolicyDualData dual_data(const CompositeSystem& sys, const FactoredPolicy& p, const Vector& q,
                         Norm norm, std::uint64_t policy_id) {
  if (q.size() != sys.num_states())
    throw std::invalid_argument("q must have one entry per composite state");
  PolicyDualData d;
  d.ev = evaluate_policy(sys, p, policy_id);
  const Matrix M = composite_transition(sys, p) - Matrix::Identity(sys.num_states(), sys.num_states());
  d.theta = d.ev.beta * M;
  d.theta_residual = d.theta.cwiseAbs().maxCoeff();
  d.raw = d.ev.k_sys + M * q;
  d.phi = norm_of(d.raw, norm);
  return d;
}

}  // namespace

double psi(const CompositeSystem& sys, const FactoredPolicy& p) {
  return evaluate_policy(sys, p).J_sys;
}

LambdaPoint lambda_point(const CompositeSystem& sys, const FactoredPolicy& p, const Vector& q,
                         Norm norm) {
  const PolicyDualData d = dual_data(sys, p, q, norm, 0);
  if (d.theta_residual > 1e-8) {
    std::ostringstream os;
    os << "A3/stationarity violated: ||beta M||_inf = " << d.theta_residual;
    throw std::runtime_error(os.str());
  }
  return LambdaPoint{0, d.theta, d.theta_residual, d.raw, d.phi};
}

double lagrangian(const CompositeSystem& sys, const FactoredPolicy& p, const Vector& q,
                  const Vector& nu, Norm norm) {
  if (nu.size() != sys.num_states())
    throw std::invalid_argument("nu must have one entry per composite state");
  const PolicyDualData d = dual_data(sys, p, q, norm, 0);
  return d.phi + d.theta.dot(nu);
}

MinCommonResult min_common(const CompositeSystem& sys, const Vector& q, Norm norm) {
  const PolicyEnumerator en(sys);
  MinCommonResult best{0, std::numeric_limits<double>::infinity()};
  en.for_each([&](std::uint64_t idx, const FactoredPolicy& p) {
    const double phi = dual_data(sys, p, q, norm, idx + 1).phi;
    if (phi < best.phi_star) best = {idx + 1, phi};
  });
  return best;
}

MaxCrossingResult max_crossing(const CompositeSystem& sys, const Vector& q, Norm norm, int probes,
                               std::uint64_t seed) {
  const PolicyEnumerator en(sys);
  std::vector<PolicyDualData> data;
  data.reserve(en.count());
  en.for_each([&](std::uint64_t idx, const FactoredPolicy& p) {
    data.push_back(dual_data(sys, p, q, norm, idx + 1));
  });

  const Index n = sys.num_states();
  std::vector<Vector> nus;
  nus.push_back(Vector::Zero(n));
  CounterRng rng(seed);
  for (int j = 0; j < probes; ++j) {
    Vector dir(n);
    for (Index i = 0; i < n; ++i) dir(i) = rng.uniform(-1.0, 1.0);
    const double len = dir.norm();
    if (len == 0.0) continue;
    for (double scale : {1.0, 10.0, 100.0}) nus.push_back(dir * (scale / len));
  }

  MaxCrossingResult res;
  res.b_star = -std::numeric_limits<double>::infinity();
  for (const auto& nu : nus) {
    double b = std::numeric_limits<double>::infinity();
    for (const auto& d : data) b = std::min(b, d.phi + d.theta.dot(nu));
    if (b > res.b_star) {
      res.b_star = b;
      res.certificate_nu = nu;
    }
  }
  return res;
}

OptimalityAudit pareto_optimality_audit(const CompositeSystem& sys, const Vector& q, Norm norm) {
  if (q.size() != sys.num_states())
    throw std::invalid_argument("q must have one entry per composite state");
  OptimalityAudit audit;

  const ParetoReport pareto = pareto_policy(sys);
  const PolicyEvaluation pareto_ev = evaluate_policy(sys, pareto.policy);
  audit.pareto_cost = pareto_ev.J_sys;

  const Matrix P0 = composite_transition_general(sys, pareto.policy);
  const Vector pareto_raw =
      pareto_ev.k_sys + (P0 - Matrix::Identity(sys.num_states(), sys.num_states())) * q;
  const double pareto_phi = norm_of(pareto_raw, norm);

  const PolicyEnumerator en(sys);
  std::vector<PolicyDualData> data(en.count());
  parallel_for(en.count(),
               [&](std::size_t idx) { data[idx] = dual_data(sys, en.at(idx), q, norm, idx + 1); });

  audit.best_cost = std::numeric_limits<double>::infinity();
  audit.phi_star = std::numeric_limits<double>::infinity();
  audit.all_elementwise_ok = true;
  audit.norm_dominance_ok = true;
  for (const auto& d : data) {
    PolicyAuditRow row;
    row.policy_id = d.ev.policy_id;
    row.psi = d.ev.J_sys;
    row.phi = d.phi;
    row.theta_residual = d.theta_residual;
    row.elementwise_ok = true;
    for (Index m = 0; m < sys.num_states(); ++m)
      if (pareto_ev.k_sys(m) > d.raw(m) + 1e-12) {
        row.elementwise_ok = false;
        row.first_violation = m;
        break;
      }
    audit.all_elementwise_ok = audit.all_elementwise_ok && row.elementwise_ok;
    if (pareto_phi > d.phi + 1e-12) audit.norm_dominance_ok = false;
    if (d.ev.J_sys < audit.best_cost) {
      audit.best_cost = d.ev.J_sys;
      audit.best_policy = d.ev.policy_id;
    }
    if (d.phi < audit.phi_star) {
      audit.phi_star = d.phi;
      audit.phi_argmin = d.ev.policy_id;
    }
    audit.rows.push_back(std::move(row));
  }

  audit.pareto_gap = audit.pareto_cost - audit.best_cost;
  const auto factored = factor_policy(pareto.policy, sys);
  if (factored) {
    const FactoredPolicy best = en.at(audit.best_policy - 1);
    audit.pareto_is_lift_of_best = factored->action == best.action;
  }

  audit.b_star = max_crossing(sys, q, norm).b_star;
  audit.weak_duality_margin = audit.phi_star - audit.b_star;
  return audit;
}

std::string OptimalityAudit::to_csv() const {
  std::ostringstream os;
  os << "policy,psi,phi,theta_residual,elementwise_thm1_ok,phi_star,b_star,gap\n";
  for (const auto& r : rows)
    os << r.policy_id << ',' << fmt_double(r.psi) << ',' << fmt_double(r.phi) << ','
       << fmt_double(r.theta_residual) << ',' << (r.elementwise_ok ? 1 : 0) << ",,,\n";
  os << "summary,,,," << (all_elementwise_ok ? 1 : 0) << ',' << fmt_double(phi_star) << ','
     << fmt_double(b_star) << ',' << fmt_double(pareto_gap) << '\n';
  return os.str();
}

}  // namespace pac
