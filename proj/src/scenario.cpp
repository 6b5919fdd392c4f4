#include "pac/scenario.hpp"

#include "pac/avgcost.hpp"
#include "pac/pareto.hpp"
#include "pac/rng.hpp"
#include "pac/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pac {

namespace {

Matrix matrix2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// Canonical joint-action index over the full action product, subsystem 1
// slowest. Used by the table system-cost form.
Index joint_index(const CompositeSystem& sys, const JointAction& u) {
  Index idx = 0;
  for (int i = 0; i < sys.num_subsystems(); ++i)
    idx = idx * sys.subsystems[i].num_actions() + u[i];
  return idx;
}

}  // namespace

CoupledCostModel::CoupledCostModel(CoupledCostSpec spec) : spec_(std::move(spec)) {
  const Index n = spec_.W.size();
  if (spec_.z.rows() != n || spec_.z.cols() != n)
    throw std::invalid_argument("coupling matrix z must be N x N");
  if (!spec_.W.allFinite() || spec_.z.minCoeff() < 0.0)
    throw std::invalid_argument("inputs W must be finite and coupling fractions nonnegative");
  if (spec_.system_form == SystemCostForm::WeightedSum && spec_.weights.size() != n)
    throw std::invalid_argument("weighted system form needs one weight per subsystem");
  if (spec_.alt_denominator && n != 2)
    throw std::invalid_argument("alt_denominator is defined for two subsystems only");
}

double CoupledCostModel::output_of(const CompositeSystem& sys, int i, Index m, Index k,
                                   const JointAction& u) const {
  return sys.subsystems[i].out(sys.indexer.state_of(m, i), u[i], sys.indexer.state_of(k, i));
}

double CoupledCostModel::subsystem_cost(const CompositeSystem& sys, int i, Index m, Index k,
                                        const JointAction& u) const {
  const int N = sys.num_subsystems();
  const double yi = output_of(sys, i, m, k, u);
  double received = 0.0, outgoing = 0.0;
  for (int j = 0; j < N; ++j) {
    if (j == i) continue;
    received += spec_.z(j, i) * output_of(sys, j, m, k, u);
    outgoing += spec_.z(i, j);
  }
  double denom = yi * (1.0 + outgoing);
  if (spec_.alt_denominator && i != 0) denom = yi + spec_.z(0, i) * output_of(sys, 0, m, k, u);
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "invalid output in cost denominator at transition (" << m + 1 << "," << k + 1
       << "), subsystem " << i + 1;
    throw std::domain_error(os.str());
  }
  return (spec_.W(i) + received) / denom;
}

double CoupledCostModel::system_cost(const CompositeSystem& sys, Index m, Index k,
                                     const JointAction& u) const {
  const int N = sys.num_subsystems();
  switch (spec_.system_form) {
    case SystemCostForm::RatioOfTotals: {
      double total_out = 0.0;
      for (int i = 0; i < N; ++i) total_out += output_of(sys, i, m, k, u);
      if (!(total_out > 0.0)) {
        std::ostringstream os;
        os << "invalid output in cost denominator at transition (" << m + 1 << "," << k + 1 << ")";
        throw std::domain_error(os.str());
      }
      return spec_.W.sum() / total_out;
    }
    case SystemCostForm::SumOfSubsystems: {
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += subsystem_cost(sys, i, m, k, u);
      return s;
    }
    case SystemCostForm::WeightedSum: {
      double s = 0.0;
      for (int i = 0; i < N; ++i) s += spec_.weights(i) * subsystem_cost(sys, i, m, k, u);
      return s;
    }
    case SystemCostForm::Table:
      return spec_.table(m, joint_index(sys, u));
  }
  throw std::logic_error("unreachable");
}

std::shared_ptr<const CostModel> make_coupled_cost_model(CoupledCostSpec spec) {
  return std::make_shared<CoupledCostModel>(std::move(spec));
}

CompositeSystem paper_example() {
  SubsystemModel s1;
  s1.num_states = 2;
  s1.actions = {"a", "b"};
  s1.transition = {matrix2(0.7, 0.3, 0.4, 0.6), matrix2(0.9, 0.1, 0.2, 0.8)};
  s1.output = {matrix2(4.8, 4.0, 5.6, 9.6), matrix2(8.0, 6.4, 11.2, 10.4)};

  SubsystemModel s2;
  s2.num_states = 2;
  s2.actions = {"a", "b"};
  s2.transition = {matrix2(0.5, 0.5, 0.45, 0.55), matrix2(0.6, 0.4, 0.3, 0.7)};
  s2.output = {matrix2(4.9, 4.2, 6.3, 7.0), matrix2(6.3, 8.4, 7.7, 9.8)};

  CoupledCostSpec cost;
  cost.W = Vector(2);
  cost.W << 15.0, 16.0;
  cost.z = Matrix::Zero(2, 2);
  cost.z(0, 1) = 0.25;
  cost.z(1, 0) = 0.43;

  return CompositeSystem({s1, s2}, make_coupled_cost_model(cost), {Group::Minor, Group::Minor});
}

double rho(const CompositeSystem& sys, const CompositePolicy& p, Norm norm) {
  const Vector f = stacked_stage_costs(sys, p);
  const Vector fs = utopia_point(sys);
  return norm_of(f - fs, norm);
}

double rho(const CompositeSystem& sys, const FactoredPolicy& p, Norm norm) {
  return rho(sys, lift_policy(p, sys), norm);
}

std::vector<std::vector<OutputRange>> ReplicationConfig::default_ranges() {
  return {{{1.0, 3.0, true}, {8.0, 10.0, true}}, {{2.0, 4.0, true}, {9.0, 12.0, true}}};
}

namespace {

void check_ranges(const std::vector<std::vector<OutputRange>>& ranges,
                  const std::vector<SubsystemModel>& subs) {
  if (ranges.size() != subs.size())
    throw std::invalid_argument("one range list per subsystem required");
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (ranges[i].size() != static_cast<std::size_t>(subs[i].num_actions()))
      throw std::invalid_argument("one output range per action required");
    for (const auto& r : ranges[i])
      if (r.sample && !(r.lo > 0.0 && r.hi >= r.lo))
        throw std::invalid_argument("output ranges must be nonempty with positive lower bounds");
  }
}

}  // namespace

CompositeSystem sample_scenario(const CompositeSystem& base,
                                const std::vector<std::vector<OutputRange>>& ranges,
                                bool randomize_transitions, CounterRng& rng) {
  check_ranges(ranges, base.subsystems);
  std::vector<SubsystemModel> subs = base.subsystems;
  for (std::size_t i = 0; i < subs.size(); ++i)
    for (int u = 0; u < subs[i].num_actions(); ++u) {
      const OutputRange& r = ranges[i][u];
      if (!r.sample) continue;
      for (int x = 0; x < subs[i].num_states; ++x)
        for (int xp = 0; xp < subs[i].num_states; ++xp)
          subs[i].output[u](x, xp) = rng.uniform(r.lo, r.hi);
    }
  if (randomize_transitions)
    for (auto& s : subs)
      for (int u = 0; u < s.num_actions(); ++u)
        for (int x = 0; x < s.num_states; ++x) s.transition[u].row(x) = rng.simplex_row(s.num_states);
  return CompositeSystem(std::move(subs), base.cost_model, base.group_labels);
}

ReplicationReport replicate(const ReplicationConfig& config) {
  if (config.reps < 1) throw std::invalid_argument("replication count must be >= 1");
  const CompositeSystem base = paper_example();
  const auto ranges = config.ranges.empty() ? ReplicationConfig::default_ranges() : config.ranges;
  check_ranges(ranges, base.subsystems);

  ReplicationReport report;
  report.reps = config.reps;
  report.master_seed = config.master_seed;
  report.rows.resize(config.reps);

  parallel_for(static_cast<std::size_t>(config.reps), [&](std::size_t idx) {
    const int rep = static_cast<int>(idx) + 1;
    ReplicationRow row;
    row.rep = rep;
    row.seed = config.master_seed ^ static_cast<std::uint64_t>(rep);
    try {
      CounterRng rng = CounterRng::stream(config.master_seed, static_cast<std::uint64_t>(rep));
      const CompositeSystem sys =
          sample_scenario(base, ranges, config.randomize_transitions, rng);

      const RankedEvaluations ranked = enumerate_and_rank(sys, Objective::system());
      const PolicyEvaluation& opt = ranked.best();
      const ParetoReport pareto = pareto_policy(sys);

      row.J_opt = opt.J_sys;
      row.J_pareto = evaluate_policy(sys, pareto.policy).J_sys;
      row.dJ = row.J_pareto - row.J_opt;

      const PolicyEnumerator en(sys);
      row.rho_pareto = rho(sys, pareto.policy, config.norm);
      row.rho_opt = rho(sys, en.at(opt.policy_id - 1), config.norm);
      double min_rho = row.rho_opt;
      en.for_each([&](std::uint64_t, const FactoredPolicy& p) {
        min_rho = std::min(min_rho, rho(sys, p, config.norm));
      });
      row.drho = std::abs(row.rho_pareto - row.rho_opt);
      row.argmin_rho_is_pareto = min_rho >= row.rho_pareto - 1e-9;
      if (std::abs(min_rho - row.rho_opt) > 1e-9) row.error = "argmin-rho differs from J-optimum";
    } catch (const std::exception& e) {
      row.skipped = true;
      row.error = e.what();
    }
    report.rows[idx] = std::move(row);
  });

  for (const auto& row : report.rows) {
    if (row.skipped) {
      ++report.skipped;
      continue;
    }
    if (row.dJ > 1e-9) ++report.violations_J;
    if (row.drho > 1e-9) ++report.violations_rho;
    if (!row.error.empty()) ++report.violations_argmin;
  }
  return report;
}

std::string ReplicationReport::to_csv() const {
  std::ostringstream os;
  os << "rep,seed,J_pareto,J_opt,dJ,rho_pareto,rho_opt,drho,argmin_rho_is_pareto\n";
  for (const auto& r : rows) {
    if (r.skipped) {
      os << r.rep << ',' << r.seed << ",nan,nan,nan,nan,nan,nan,0\n";
      continue;
    }
    os << r.rep << ',' << r.seed << ',' << fmt_double(r.J_pareto) << ',' << fmt_double(r.J_opt)
       << ',' << fmt_double(r.dJ) << ',' << fmt_double(r.rho_pareto) << ','
       << fmt_double(r.rho_opt) << ',' << fmt_double(r.drho) << ','
       << (r.argmin_rho_is_pareto ? 1 : 0) << '\n';
  }
  return os.str();
}

std::string ReplicationReport::histogram_csv(int bins) const {
  double hi = 1e-12;
  for (const auto& r : rows)
    if (!r.skipped) hi = std::max({hi, r.dJ, r.drho});
  hi *= 1.0 + 1e-9;
  std::vector<int> count_dJ(bins, 0), count_drho(bins, 0);
  for (const auto& r : rows) {
    if (r.skipped) continue;
    const auto bin_of = [&](double v) {
      return std::min(bins - 1, std::max(0, static_cast<int>(v / hi * bins)));
    };
    ++count_dJ[bin_of(r.dJ)];
    ++count_drho[bin_of(r.drho)];
  }
  std::ostringstream os;
  os << "bin_lo,bin_hi,count_dJ,count_drho\n";
  for (int b = 0; b < bins; ++b)
    os << fmt_double(hi * b / bins) << ',' << fmt_double(hi * (b + 1) / bins) << ',' << count_dJ[b]
       << ',' << count_drho[b] << '\n';
  return os.str();
}

namespace {

Matrix json_to_matrix(const nlohmann::json& rows) {
  const auto r = rows.size();
  const auto c = rows.at(0).size();
  Matrix m(r, c);
  for (std::size_t i = 0; i < r; ++i) {
    if (rows.at(i).size() != c) throw std::invalid_argument("ragged matrix in scenario JSON");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows.at(i).at(j).get<double>();
  }
  return m;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

CompositeSystem scenario_from_json(const nlohmann::json& j) {
  std::vector<SubsystemModel> subs;
  for (const auto& js : j.at("subsystems")) {
    SubsystemModel s;
    s.num_states = js.at("num_states").get<int>();
    for (const auto& a : js.at("actions")) s.actions.push_back(a.get<std::string>());
    const auto& trans = js.at("transition");
    const auto& out = js.at("output");
    if (static_cast<int>(trans.size()) != s.num_states ||
        static_cast<int>(out.size()) != s.num_states)
      throw std::invalid_argument("transition/output tensors must have num_states rows");
    const int na = static_cast<int>(s.actions.size());
    s.transition.assign(na, Matrix::Zero(s.num_states, s.num_states));
    s.output.assign(na, Matrix::Zero(s.num_states, s.num_states));
    for (int x = 0; x < s.num_states; ++x) {
      if (static_cast<int>(trans.at(x).size()) != na || static_cast<int>(out.at(x).size()) != na)
        throw std::invalid_argument("transition/output tensors must have one row per action");
      for (int u = 0; u < na; ++u)
        for (int xp = 0; xp < s.num_states; ++xp) {
          s.transition[u](x, xp) = trans.at(x).at(u).at(xp).get<double>();
          s.output[u](x, xp) = out.at(x).at(u).at(xp).get<double>();
        }
    }
    if (js.contains("admissible")) {
      for (const auto& per_state : js.at("admissible")) {
        std::vector<int> adm;
        for (const auto& a : per_state) adm.push_back(a.get<int>() - 1);  // 1-based on the wire
        std::sort(adm.begin(), adm.end());
        s.admissible.push_back(std::move(adm));
      }
    }
    subs.push_back(std::move(s));
  }

  const auto& jc = j.at("cost");
  if (jc.at("form").get<std::string>() != "coupled")
    throw std::invalid_argument("unknown cost form: " + jc.at("form").get<std::string>());
  CoupledCostSpec spec;
  const auto& w = jc.at("W");
  spec.W.resize(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) spec.W(i) = w.at(i).get<double>();
  spec.z = json_to_matrix(jc.at("z"));
  if (jc.contains("system")) {
    const auto& sysform = jc.at("system");
    if (sysform.is_string()) {
      const auto name = sysform.get<std::string>();
      if (name == "ratio")
        spec.system_form = SystemCostForm::RatioOfTotals;
      else if (name == "sum")
        spec.system_form = SystemCostForm::SumOfSubsystems;
      else
        throw std::invalid_argument("unknown system cost form: " + name);
    } else if (sysform.contains("weighted")) {
      spec.system_form = SystemCostForm::WeightedSum;
      const auto& ws = sysform.at("weighted");
      spec.weights.resize(ws.size());
      for (std::size_t i = 0; i < ws.size(); ++i) spec.weights(i) = ws.at(i).get<double>();
    } else if (sysform.contains("table")) {
      spec.system_form = SystemCostForm::Table;
      spec.table = json_to_matrix(sysform.at("table"));
    } else {
      throw std::invalid_argument("unknown system cost form");
    }
  }
  spec.alt_denominator = jc.value("alt_denominator", false);

  std::vector<Group> groups;
  if (j.contains("groups"))
    for (const auto& g : j.at("groups")) {
      const auto name = g.get<std::string>();
      if (name == "minor")
        groups.push_back(Group::Minor);
      else if (name == "principal")
        groups.push_back(Group::Principal);
      else
        throw std::invalid_argument("unknown group label: " + name);
    }

  return CompositeSystem(std::move(subs), make_coupled_cost_model(std::move(spec)),
                         std::move(groups));
}

nlohmann::json scenario_to_json(const CompositeSystem& sys) {
  const auto* coupled = dynamic_cast<const CoupledCostModel*>(sys.cost_model.get());
  if (!coupled) throw std::invalid_argument("only coupled cost models serialize to JSON");

  nlohmann::json j;
  j["subsystems"] = nlohmann::json::array();
  for (const auto& s : sys.subsystems) {
    nlohmann::json js;
    js["num_states"] = s.num_states;
    js["actions"] = s.actions;
    nlohmann::json trans = nlohmann::json::array(), out = nlohmann::json::array();
    for (int x = 0; x < s.num_states; ++x) {
      nlohmann::json tu = nlohmann::json::array(), ou = nlohmann::json::array();
      for (int u = 0; u < s.num_actions(); ++u) {
        nlohmann::json trow = nlohmann::json::array(), orow = nlohmann::json::array();
        for (int xp = 0; xp < s.num_states; ++xp) {
          trow.push_back(s.transition[u](x, xp));
          orow.push_back(s.output[u](x, xp));
        }
        tu.push_back(std::move(trow));
        ou.push_back(std::move(orow));
      }
      trans.push_back(std::move(tu));
      out.push_back(std::move(ou));
    }
    js["transition"] = std::move(trans);
    js["output"] = std::move(out);
    nlohmann::json adm = nlohmann::json::array();
    for (const auto& per_state : s.admissible) {
      nlohmann::json one = nlohmann::json::array();
      for (int u : per_state) one.push_back(u + 1);
      adm.push_back(std::move(one));
    }
    js["admissible"] = std::move(adm);
    j["subsystems"].push_back(std::move(js));
  }

  const auto& spec = coupled->spec();
  nlohmann::json jc;
  jc["form"] = "coupled";
  jc["W"] = std::vector<double>(spec.W.data(), spec.W.data() + spec.W.size());
  jc["z"] = matrix_to_json(spec.z);
  switch (spec.system_form) {
    case SystemCostForm::RatioOfTotals:
      jc["system"] = "ratio";
      break;
    case SystemCostForm::SumOfSubsystems:
      jc["system"] = "sum";
      break;
    case SystemCostForm::WeightedSum:
      jc["system"]["weighted"] =
          std::vector<double>(spec.weights.data(), spec.weights.data() + spec.weights.size());
      break;
    case SystemCostForm::Table:
      jc["system"]["table"] = matrix_to_json(spec.table);
      break;
  }
  if (spec.alt_denominator) jc["alt_denominator"] = true;
  j["cost"] = std::move(jc);

  nlohmann::json groups = nlohmann::json::array();
  for (Group g : sys.group_labels) groups.push_back(g == Group::Minor ? "minor" : "principal");
  j["groups"] = std::move(groups);
  return j;
}

CompositeSystem load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scenario file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return scenario_from_json(j);
}

}  // namespace pac
