#include "pac/pareto.hpp"

#include "pac/cost.hpp"
#include "pac/util.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pac {

StageCostPoint stage_costs(const CompositeSystem& sys, Index m, const JointAction& u) {
  if (!sys.cost_model) throw std::invalid_argument("composite system has no cost model");
  const Vector row = action_row(sys, m, u);  // throws on inadmissible action
  const Index n = sys.num_states();
  const int N = sys.num_subsystems();
  StageCostPoint pt;
  pt.state = m;
  pt.action = u;
  pt.per_subsystem = Vector::Zero(N);
  pt.system = 0.0;
  for (Index k = 0; k < n; ++k) {
    if (row(k) == 0.0) continue;
    for (int i = 0; i < N; ++i)
      pt.per_subsystem(i) += row(k) * sys.cost_model->subsystem_cost(sys, i, m, k, u);
    pt.system += row(k) * sys.cost_model->system_cost(sys, m, k, u);
  }
  return pt;
}

std::vector<StageCostPoint> stage_points(const CompositeSystem& sys, Index m) {
  std::vector<StageCostPoint> pts;
  for (const auto& u : sys.admissible_joint_actions(m)) pts.push_back(stage_costs(sys, m, u));
  return pts;
}

bool dominates(const Vector& a, const Vector& b) {
  bool strict = false;
  for (Index i = 0; i < a.size(); ++i) {
    if (a(i) > b(i)) return false;
    if (a(i) < b(i)) strict = true;
  }
  return strict;
}

namespace {

std::vector<bool> frontier_mask(const std::vector<StageCostPoint>& pts) {
  std::vector<bool> on(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size() && on[i]; ++j)
      if (j != i && dominates(pts[j].per_subsystem, pts[i].per_subsystem)) on[i] = false;
  return on;
}

}  // namespace

std::vector<StageCostPoint> pareto_frontier(const CompositeSystem& sys, Index m) {
  const auto pts = stage_points(sys, m);
  const auto on = frontier_mask(pts);
  std::vector<StageCostPoint> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (on[i]) out.push_back(pts[i]);
  return out;
}

bool ParetoReport::all_selected_on_frontier() const {
  return std::all_of(states.begin(), states.end(),
                     [](const StateSelection& s) { return s.selected_on_frontier; });
}

ParetoReport pareto_policy(const CompositeSystem& sys) {
  ParetoReport report;
  report.states.resize(sys.num_states());
  parallel_for(static_cast<std::size_t>(sys.num_states()), [&](std::size_t mi) {
    const auto m = static_cast<Index>(mi);
    StateSelection sel;
    sel.points = stage_points(sys, m);
    sel.on_frontier = frontier_mask(sel.points);
    sel.selected = 0;
    for (std::size_t a = 1; a < sel.points.size(); ++a)
      if (sel.points[a].system < sel.points[sel.selected].system) sel.selected = a;
    sel.selected_on_frontier = sel.on_frontier[sel.selected];
    report.states[mi] = std::move(sel);
  });
  report.policy.action.reserve(sys.num_states());
  for (const auto& sel : report.states)
    report.policy.action.push_back(sel.points[sel.selected].action);
  return report;
}

CompositePolicy group_policy(const CompositeSystem& sys, GroupMode mode) {
  CompositePolicy out;
  out.action.reserve(sys.num_states());
  for (Index m = 0; m < sys.num_states(); ++m) {
    const auto pts = stage_points(sys, m);
    const StageCostPoint* chosen = nullptr;
    for (const auto& cand : pts) {
      bool optimal = true;
      for (const auto& other : pts) {
        const bool covers = mode == GroupMode::MinorMax
                                ? (cand.per_subsystem.array() >= other.per_subsystem.array()).all()
                                : (cand.per_subsystem.array() <= other.per_subsystem.array()).all();
        if (!covers) {
          optimal = false;
          break;
        }
      }
      if (optimal) {
        chosen = &cand;
        break;
      }
    }
    if (!chosen) {
      std::ostringstream os;
      os << "no componentwise " << (mode == GroupMode::MinorMax ? "maximizer" : "minimizer")
         << " at composite state " << m + 1 << " over " << pts.size()
         << " admissible joint actions";
      throw NoComponentwiseOptimumError(os.str(), m);
    }
    out.action.push_back(chosen->action);
  }
  return out;
}

Vector utopia_point(const CompositeSystem& sys) {
  const int N = sys.num_subsystems();
  Vector f = Vector::Zero(sys.num_states() * N);
  for (Index m = 0; m < sys.num_states(); ++m) {
    const auto pts = stage_points(sys, m);
    for (int i = 0; i < N; ++i) {
      double best = pts.front().per_subsystem(i);
      for (const auto& pt : pts) best = std::min(best, pt.per_subsystem(i));
      f(m * N + i) = best;
    }
  }
  return f;
}

Vector stacked_stage_costs(const CompositeSystem& sys, const CompositePolicy& p) {
  check_policy(sys, p);
  const int N = sys.num_subsystems();
  Vector f = Vector::Zero(sys.num_states() * N);
  for (Index m = 0; m < sys.num_states(); ++m) {
    const StageCostPoint pt = stage_costs(sys, m, p.action[m]);
    for (int i = 0; i < N; ++i) f(m * N + i) = pt.per_subsystem(i);
  }
  return f;
}

std::string ParetoReport::to_csv(const CompositeSystem& sys) const {
  const int N = sys.num_subsystems();
  std::ostringstream os;
  os << "state,action_tuple";
  for (int i = 1; i <= N; ++i) os << ",k_sub" << i;
  os << ",k_system,on_frontier,selected\n";
  for (std::size_t mi = 0; mi < states.size(); ++mi) {
    const auto& sel = states[mi];
    for (std::size_t a = 0; a < sel.points.size(); ++a) {
      const auto& pt = sel.points[a];
      os << mi + 1 << ',';
      for (int i = 0; i < N; ++i) {
        if (i) os << '|';
        os << sys.subsystems[i].actions[pt.action[i]];
      }
      for (int i = 0; i < N; ++i) os << ',' << fmt_double(pt.per_subsystem(i));
      os << ',' << fmt_double(pt.system) << ',' << (sel.on_frontier[a] ? 1 : 0) << ','
         << (a == sel.selected ? 1 : 0) << '\n';
    }
  }
  return os.str();
}

}  // namespace pac
