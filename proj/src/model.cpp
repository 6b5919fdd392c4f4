#include "pac/model.hpp"

#include "pac/kron.hpp"
#include "pac/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pac {

namespace {

constexpr double kRowSumTol = 1e-12;

std::string subsystem_label(int id, int x, int u) {
  std::ostringstream os;
  os << "subsystem " << id << ", state " << x + 1 << ", action " << u + 1;
  return os.str();
}

}  // namespace

Matrix SubsystemModel::policy_matrix(std::span<const int> mu) const {
  Matrix P(num_states, num_states);
  for (int x = 0; x < num_states; ++x) P.row(x) = transition[mu[x]].row(x);
  return P;
}

Matrix SubsystemModel::output_matrix(std::span<const int> mu) const {
  Matrix Y(num_states, num_states);
  for (int x = 0; x < num_states; ++x) Y.row(x) = output[mu[x]].row(x);
  return Y;
}

// Shape checks only; value-level invariants (row stochasticity, nonempty
// admissible sets, finite outputs) are validate()'s to report, so that a
// malformed scenario can still be loaded and diagnosed.
void SubsystemModel::check() const {
  if (num_states <= 0) throw std::invalid_argument("subsystem must have at least one state");
  if (actions.empty()) throw std::invalid_argument("subsystem must have at least one action");
  const auto na = static_cast<std::size_t>(num_actions());
  if (transition.size() != na || output.size() != na)
    throw std::invalid_argument("transition/output tensors must have one matrix per action");
  for (int u = 0; u < num_actions(); ++u)
    if (transition[u].rows() != num_states || transition[u].cols() != num_states ||
        output[u].rows() != num_states || output[u].cols() != num_states)
      throw std::invalid_argument("transition/output matrices must be num_states x num_states");
  if (admissible.size() != static_cast<std::size_t>(num_states))
    throw std::invalid_argument("admissible sets must cover every state");
  for (int x = 0; x < num_states; ++x)
    for (int u : admissible[x])
      if (u < 0 || u >= num_actions())
        throw std::invalid_argument("admissible action out of range at subsystem " +
                                    std::to_string(id));
}

CompositeIndexer::CompositeIndexer(std::vector<int> sizes) : sizes_(std::move(sizes)) {
  strides_.assign(sizes_.size(), 1);
  total_ = 1;
  for (int i = static_cast<int>(sizes_.size()) - 1; i >= 0; --i) {
    strides_[i] = total_;
    total_ *= sizes_[i];
  }
}

Index CompositeIndexer::to_index(std::span<const int> states) const {
  if (states.size() != sizes_.size())
    throw std::domain_error("state tuple has wrong number of components");
  Index m = 0;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (states[i] < 0 || states[i] >= sizes_[i]) {
      std::ostringstream os;
      os << "state " << states[i] + 1 << " out of range for subsystem " << i + 1 << " (1.."
         << sizes_[i] << ")";
      throw std::domain_error(os.str());
    }
    m += strides_[i] * states[i];
  }
  return m;
}

StateTuple CompositeIndexer::to_states(Index m) const {
  StateTuple x(sizes_.size());
  for (std::size_t i = 0; i < sizes_.size(); ++i) x[i] = state_of(m, static_cast<int>(i));
  return x;
}

int CompositeIndexer::state_of(Index m, int subsystem) const {
  return static_cast<int>((m / strides_[subsystem]) % sizes_[subsystem]);
}

CompositeSystem::CompositeSystem(std::vector<SubsystemModel> subsystems_,
                                 std::shared_ptr<const CostModel> cost_model_,
                                 std::vector<Group> group_labels_, Index composite_cap_,
                                 std::uint64_t enumeration_cap_)
    : subsystems(std::move(subsystems_)),
      cost_model(std::move(cost_model_)),
      group_labels(std::move(group_labels_)),
      composite_cap(composite_cap_),
      enumeration_cap(enumeration_cap_) {
  if (subsystems.empty()) throw std::invalid_argument("composite system needs >= 1 subsystem");
  std::vector<int> sizes;
  Index total = 1;
  for (std::size_t i = 0; i < subsystems.size(); ++i) {
    auto& s = subsystems[i];
    s.id = static_cast<int>(i) + 1;
    if (s.admissible.empty()) {
      std::vector<int> all(s.num_actions());
      std::iota(all.begin(), all.end(), 0);
      s.admissible.assign(s.num_states, all);
    }
    s.check();
    sizes.push_back(s.num_states);
    if (total > composite_cap / std::max(1, s.num_states))
      throw std::length_error("composition too large");
    total *= s.num_states;
  }
  if (group_labels.empty()) group_labels.assign(subsystems.size(), Group::Minor);
  if (group_labels.size() != subsystems.size())
    throw std::invalid_argument("one group label per subsystem required");
  indexer = CompositeIndexer(std::move(sizes));
}

bool CompositeSystem::admissible_at(Index m, const JointAction& u) const {
  if (u.size() != subsystems.size()) return false;
  for (int i = 0; i < num_subsystems(); ++i) {
    const auto& adm = subsystems[i].admissible[indexer.state_of(m, i)];
    if (std::find(adm.begin(), adm.end(), u[i]) == adm.end()) return false;
  }
  return true;
}

JointAction CompositeSystem::joint_action(const FactoredPolicy& p, Index m) const {
  JointAction u(subsystems.size());
  for (int i = 0; i < num_subsystems(); ++i) u[i] = p.action[i][indexer.state_of(m, i)];
  return u;
}

std::vector<JointAction> CompositeSystem::admissible_joint_actions(Index m) const {
  const int n = num_subsystems();
  std::vector<const std::vector<int>*> lists(n);
  std::size_t total = 1;
  for (int i = 0; i < n; ++i) {
    lists[i] = &subsystems[i].admissible[indexer.state_of(m, i)];
    total *= lists[i]->size();
  }
  std::vector<JointAction> out;
  out.reserve(total);
  JointAction u(n);
  std::vector<std::size_t> pos(n, 0);
  for (std::size_t c = 0; c < total; ++c) {
    for (int i = 0; i < n; ++i) u[i] = (*lists[i])[pos[i]];
    out.push_back(u);
    for (int i = n - 1; i >= 0; --i) {
      if (++pos[i] < lists[i]->size()) break;
      pos[i] = 0;
    }
  }
  return out;
}

void check_policy(const CompositeSystem& sys, const FactoredPolicy& p) {
  if (p.action.size() != static_cast<std::size_t>(sys.num_subsystems()))
    throw std::domain_error("policy does not match the number of subsystems");
  for (int i = 0; i < sys.num_subsystems(); ++i) {
    const auto& s = sys.subsystems[i];
    if (p.action[i].size() != static_cast<std::size_t>(s.num_states))
      throw std::domain_error("policy does not cover every state of subsystem " +
                              std::to_string(i + 1));
    for (int x = 0; x < s.num_states; ++x) {
      const auto& adm = s.admissible[x];
      if (std::find(adm.begin(), adm.end(), p.action[i][x]) == adm.end())
        throw std::domain_error("inadmissible action for subsystem " + std::to_string(i + 1) +
                                " at state " + std::to_string(x + 1));
    }
  }
}

void check_policy(const CompositeSystem& sys, const CompositePolicy& p) {
  if (p.action.size() != static_cast<std::size_t>(sys.num_states()))
    throw std::domain_error("policy does not cover every composite state");
  for (Index m = 0; m < sys.num_states(); ++m)
    if (!sys.admissible_at(m, p.action[m]))
      throw std::domain_error("inadmissible joint action at composite state " +
                              std::to_string(m + 1));
}

CompositePolicy lift_policy(const FactoredPolicy& p, const CompositeSystem& sys) {
  check_policy(sys, p);
  CompositePolicy out;
  out.action.reserve(sys.num_states());
  for (Index m = 0; m < sys.num_states(); ++m) out.action.push_back(sys.joint_action(p, m));
  return out;
}

std::optional<FactoredPolicy> factor_policy(const CompositePolicy& p, const CompositeSystem& sys) {
  check_policy(sys, p);
  FactoredPolicy out;
  out.action.resize(sys.num_subsystems());
  for (int i = 0; i < sys.num_subsystems(); ++i)
    out.action[i].assign(sys.subsystems[i].num_states, -1);
  for (Index m = 0; m < sys.num_states(); ++m) {
    for (int i = 0; i < sys.num_subsystems(); ++i) {
      int& slot = out.action[i][sys.indexer.state_of(m, i)];
      if (slot == -1)
        slot = p.action[m][i];
      else if (slot != p.action[m][i])
        return std::nullopt;
    }
  }
  return out;
}

PolicyEnumerator::PolicyEnumerator(const CompositeSystem& sys) {
  count_ = 1;
  for (int i = 0; i < sys.num_subsystems(); ++i) {
    const auto& s = sys.subsystems[i];
    shape_.push_back(s.num_states);
    for (int x = 0; x < s.num_states; ++x) {
      digits_.push_back({i, x, &s.admissible[x]});
      const auto c = static_cast<std::uint64_t>(s.admissible[x].size());
      if (count_ > sys.enumeration_cap / c) throw InfeasibleError("enumeration infeasible");
      count_ *= c;
    }
  }
}

FactoredPolicy PolicyEnumerator::at(std::uint64_t idx) const {
  FactoredPolicy p;
  for (int states : shape_) p.action.emplace_back(states, 0);
  // mixed-radix decode, last digit fastest
  for (auto it = digits_.rbegin(); it != digits_.rend(); ++it) {
    const auto base = static_cast<std::uint64_t>(it->choices->size());
    p.action[it->subsystem][it->state] = (*it->choices)[idx % base];
    idx /= base;
  }
  return p;
}

Matrix composite_transition(const CompositeSystem& sys, const FactoredPolicy& p) {
  check_policy(sys, p);
  Matrix P = sys.subsystems[0].policy_matrix(p.action[0]);
  for (int i = 1; i < sys.num_subsystems(); ++i)
    P = kron(P, sys.subsystems[i].policy_matrix(p.action[i]), sys.composite_cap);
  for (Index m = 0; m < P.rows(); ++m)
    if (std::abs(P.row(m).sum() - 1.0) > 1e-12)
      throw std::runtime_error("composite transition row not stochastic");
  return P;
}

Matrix composite_transition_general(const CompositeSystem& sys, const CompositePolicy& p) {
  check_policy(sys, p);
  const Index n = sys.num_states();
  Matrix P(n, n);
  for (Index m = 0; m < n; ++m) P.row(m) = action_row(sys, m, p.action[m]).transpose();
  return P;
}

Vector action_row(const CompositeSystem& sys, Index m, const JointAction& u) {
  if (!sys.admissible_at(m, u))
    throw std::domain_error("inadmissible joint action at composite state " + std::to_string(m + 1));
  const Index n = sys.num_states();
  Vector row(n);
  for (Index k = 0; k < n; ++k) {
    double prod = 1.0;
    for (int i = 0; i < sys.num_subsystems(); ++i)
      prod *= sys.subsystems[i].prob(sys.indexer.state_of(m, i), u[i], sys.indexer.state_of(k, i));
    row(k) = prod;
  }
  return row;
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status != CheckStatus::Fail; });
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    const char* tag = c.status == CheckStatus::Pass   ? "PASS"
                      : c.status == CheckStatus::Fail ? "FAIL"
                                                      : "SKIP";
    os << tag << "  " << c.name;
    for (std::size_t i = c.name.size(); i < 28; ++i) os << ' ';
    if (!c.detail.empty()) os << "  " << c.detail;
    os << '\n';
  }
  return os.str();
}

ValidationReport validate(const CompositeSystem& sys) {
  ValidationReport report;

  {
    CheckResult c{"row-stochasticity", CheckStatus::Pass, ""};
    for (const auto& s : sys.subsystems) {
      for (int u = 0; u < s.num_actions() && c.status == CheckStatus::Pass; ++u)
        for (int x = 0; x < s.num_states; ++x) {
          const double sum = s.transition[u].row(x).sum();
          if (std::abs(sum - 1.0) > kRowSumTol || s.transition[u].row(x).minCoeff() < 0.0) {
            c.status = CheckStatus::Fail;
            std::ostringstream os;
            os << "row sums to " << sum << " at " << subsystem_label(s.id, x, u);
            c.detail = os.str();
            break;
          }
        }
    }
    report.checks.push_back(std::move(c));
  }

  {
    CheckResult c{"admissible-nonempty", CheckStatus::Pass, ""};
    for (const auto& s : sys.subsystems)
      for (int x = 0; x < s.num_states; ++x)
        if (s.admissible[x].empty()) {
          c.status = CheckStatus::Fail;
          c.detail = "subsystem " + std::to_string(s.id) + ", state " + std::to_string(x + 1);
        }
    report.checks.push_back(std::move(c));
  }

  {
    CheckResult c{"outputs-finite", CheckStatus::Pass, ""};
    for (const auto& s : sys.subsystems)
      for (int u = 0; u < s.num_actions(); ++u)
        if (!s.output[u].allFinite()) {
          c.status = CheckStatus::Fail;
          c.detail = "subsystem " + std::to_string(s.id) + ", action " + std::to_string(u + 1);
        }
    report.checks.push_back(std::move(c));
  }

  // Per-policy unichain test: exactly one closed communicating class and a
  // small stationary residual for every factored policy, subsystem chains and
  // composite chain alike. Skipped past the enumeration budget.
  {
    CheckResult c{"unichain-per-policy", CheckStatus::Pass, ""};
    if (report.checks[0].status == CheckStatus::Fail) {
      c.status = CheckStatus::Skip;
      c.detail = "not attempted: transition rows are not stochastic";
    } else {
      try {
        const PolicyEnumerator en(sys);
        if (en.count() > 4096) {
          c.status = CheckStatus::Skip;
          c.detail = "policy space too large (" + std::to_string(en.count()) + " policies)";
        } else {
          double worst_residual = 0.0;
          for (std::uint64_t idx = 0; idx < en.count() && c.status == CheckStatus::Pass; ++idx) {
            const FactoredPolicy p = en.at(idx);
            try {
              for (int i = 0; i < sys.num_subsystems(); ++i) {
                const Matrix Pi = sys.subsystems[i].policy_matrix(p.action[i]);
                const RowVector b = stationary_direct(Pi);
                worst_residual =
                    std::max(worst_residual, (b * Pi - b).cwiseAbs().maxCoeff());
              }
              const Matrix P = composite_transition(sys, p);
              const RowVector b = stationary_direct(P);
              worst_residual = std::max(worst_residual, (b * P - b).cwiseAbs().maxCoeff());
            } catch (const NonUnichainError& e) {
              c.status = CheckStatus::Fail;
              c.detail = "policy " + std::to_string(idx + 1) + ": " + e.what();
            }
          }
          if (c.status == CheckStatus::Pass) {
            std::ostringstream os;
            os << "max stationary residual " << worst_residual;
            c.detail = os.str();
          }
        }
      } catch (const InfeasibleError&) {
        c.status = CheckStatus::Skip;
        c.detail = "enumeration infeasible";
      }
    }
    report.checks.push_back(std::move(c));
  }

  {
    CheckResult c{"subsystem-independence", CheckStatus::Pass,
                  "structural: each transition row depends only on the subsystem's own state "
                  "and action"};
    report.checks.push_back(std::move(c));
  }

  return report;
}

}  // namespace pac
