// Command-line surface for the average-cost control library: scenario
// validation, table reproduction, Pareto synthesis, the DP baseline, the
// optimality audit, and the replication study.
//
// Exit codes: 0 success, 1 analytic failure, 2 usage or I/O failure.

#include "pac/avgcost.hpp"
#include "pac/duality.hpp"
#include "pac/golden.hpp"
#include "pac/model.hpp"
#include "pac/pareto.hpp"
#include "pac/scenario.hpp"
#include "pac/util.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kAnalyticFailure = 1;
constexpr int kUsageFailure = 2;

struct Options {
  std::string scenario = "paper";
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string norm = "euclidean";
  std::optional<double> tol;
  bool golden = false;
  int reps = 1000;
  bool randomize_transitions = false;

  pac::Norm norm_enum() const {
    return norm == "max" ? pac::Norm::Max : pac::Norm::Euclidean;
  }
  double tolerance(double fallback) const { return tol.value_or(fallback); }
};

pac::CompositeSystem load(const Options& opt) {
  if (opt.scenario == "paper") return pac::paper_example();
  return pac::load_scenario(opt.scenario);
}

std::string out_path(const Options& opt, const std::string& name) {
  return (std::filesystem::path(opt.out_dir) / name).string();
}

void write_json(const Options& opt, const std::string& name, const nlohmann::json& j) {
  pac::write_file(out_path(opt, name), j.dump(2) + "\n");
}

std::string policy_label(const pac::CompositeSystem& sys, const pac::CompositePolicy& p) {
  if (auto f = pac::factor_policy(p, sys)) {
    const pac::PolicyEnumerator en(sys);
    for (std::uint64_t idx = 0; idx < en.count(); ++idx)
      if (en.at(idx).action == f->action) return "policy " + std::to_string(idx + 1);
  }
  return "composite (non-factored) policy";
}

nlohmann::json policy_json(const pac::CompositeSystem& sys, const pac::CompositePolicy& p) {
  nlohmann::json states = nlohmann::json::array();
  for (pac::Index m = 0; m < sys.num_states(); ++m) {
    nlohmann::json actions = nlohmann::json::array();
    for (int i = 0; i < sys.num_subsystems(); ++i)
      actions.push_back(sys.subsystems[i].actions[p.action[m][i]]);
    states.push_back({{"state", m + 1}, {"joint_action", actions}});
  }
  return states;
}

int cmd_validate(const Options& opt) {
  const auto sys = load(opt);
  const auto report = pac::validate(sys);
  std::cout << report.to_text();
  nlohmann::json j;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : report.checks)
    j["checks"].push_back({{"name", c.name},
                           {"status", c.status == pac::CheckStatus::Pass   ? "pass"
                                      : c.status == pac::CheckStatus::Fail ? "fail"
                                                                           : "skip"},
                           {"detail", c.detail}});
  j["all_passed"] = report.all_passed();
  write_json(opt, "validate.json", j);
  return report.all_passed() ? kOk : kAnalyticFailure;
}

int cmd_tables(const Options& opt) {
  const auto sys = load(opt);
  const auto ranked = pac::enumerate_and_rank(sys, pac::Objective::system());
  pac::write_file(out_path(opt, "tables.csv"), ranked.to_csv());

  if (!opt.golden) {
    std::cout << "wrote " << out_path(opt, "tables.csv") << " (" << ranked.canonical.size()
              << " policies)\n";
    return kOk;
  }
  if (opt.scenario != "paper") {
    std::cerr << "--golden applies to the built-in scenario only\n";
    return kUsageFailure;
  }
  const double tol = opt.tolerance(pac::golden::kTableTolerance);
  int mismatches = 0;
  for (int p = 0; p < 16; ++p) {
    const auto& ev = ranked.canonical[p];
    const double expected[3] = {pac::golden::kAvgCostSub1[p], pac::golden::kAvgCostSub2[p],
                                pac::golden::kAvgCostSystem[p]};
    const double actual[3] = {ev.J_sub[0], ev.J_sub[1], ev.J_sys};
    const char* names[3] = {"J_sub1", "J_sub2", "J_system"};
    for (int c = 0; c < 3; ++c)
      if (std::abs(expected[c] - actual[c]) > tol) {
        ++mismatches;
        std::cout << "MISMATCH policy " << p + 1 << " " << names[c] << ": computed "
                  << pac::fmt_double(actual[c]) << " vs reference "
                  << pac::fmt_double(expected[c]) << " (tol " << tol << ")\n";
      }
  }
  if (mismatches == 0) {
    std::cout << "all 48 reference values reproduced within " << tol << "\n";
    return kOk;
  }
  std::cout << mismatches << " of 48 reference values outside tolerance " << tol << "\n";
  return kAnalyticFailure;
}

int cmd_pareto(const Options& opt) {
  const auto sys = load(opt);
  const auto report = pac::pareto_policy(sys);
  pac::write_file(out_path(opt, "frontier.csv"), report.to_csv(sys));
  const auto ev = pac::evaluate_policy(sys, report.policy);

  nlohmann::json j;
  j["policy"] = policy_json(sys, report.policy);
  j["label"] = policy_label(sys, report.policy);
  j["J_system"] = ev.J_sys;
  j["all_selected_on_frontier"] = report.all_selected_on_frontier();
  write_json(opt, "pareto_summary.json", j);

  std::cout << "pareto selection: " << policy_label(sys, report.policy)
            << "  J = " << pac::fmt_double(ev.J_sys)
            << (report.all_selected_on_frontier() ? "" : "  [selection off the frontier]") << "\n";
  return kOk;
}

int cmd_dp(const Options& opt) {
  const auto sys = load(opt);
  const auto res = pac::relative_value_iteration(sys, opt.tolerance(1e-9));

  std::ostringstream csv;
  csv << "state,joint_action\n";
  for (pac::Index m = 0; m < sys.num_states(); ++m) {
    csv << m + 1 << ',';
    for (int i = 0; i < sys.num_subsystems(); ++i) {
      if (i) csv << '|';
      csv << sys.subsystems[i].actions[res.policy.action[m][i]];
    }
    csv << '\n';
  }
  pac::write_file(out_path(opt, "dp_policy.csv"), csv.str());

  nlohmann::json j;
  j["gain"] = res.gain;
  j["iterations"] = res.iterations;
  j["policy"] = policy_json(sys, res.policy);
  j["label"] = policy_label(sys, res.policy);
  write_json(opt, "dp_summary.json", j);

  std::cout << "dp gain " << pac::fmt_double(res.gain) << " after " << res.iterations
            << " iterations; greedy " << policy_label(sys, res.policy) << "\n";
  return kOk;
}

int cmd_audit(const Options& opt) {
  const auto sys = load(opt);
  const pac::Vector q = pac::Vector::Zero(sys.num_states());
  const auto audit = pac::pareto_optimality_audit(sys, q, opt.norm_enum());
  pac::write_file(out_path(opt, "audit.csv"), audit.to_csv());

  nlohmann::json j;
  j["phi_star"] = audit.phi_star;
  j["phi_argmin_policy"] = audit.phi_argmin;
  j["b_star"] = audit.b_star;
  j["weak_duality_margin"] = audit.weak_duality_margin;
  j["pareto_cost"] = audit.pareto_cost;
  j["best_cost"] = audit.best_cost;
  j["best_policy"] = audit.best_policy;
  j["pareto_gap"] = audit.pareto_gap;
  j["pareto_is_lift_of_best"] = audit.pareto_is_lift_of_best;
  j["all_elementwise_ok"] = audit.all_elementwise_ok;
  j["norm_dominance_ok"] = audit.norm_dominance_ok;
  write_json(opt, "audit_summary.json", j);

  const double tol = opt.tolerance(1e-9);
  std::cout << "pareto gap " << pac::fmt_double(audit.pareto_gap) << " (tol " << tol
            << "); weak-duality margin " << pac::fmt_double(audit.weak_duality_margin) << "\n";
  return audit.pareto_gap > tol ? kAnalyticFailure : kOk;
}

int cmd_replicate(const Options& opt) {
  pac::ReplicationConfig config;
  config.reps = opt.reps;
  config.master_seed = opt.seed;
  config.randomize_transitions = opt.randomize_transitions;
  config.norm = opt.norm_enum();
  const auto report = pac::replicate(config);

  pac::write_file(out_path(opt, "replications.csv"), report.to_csv());
  pac::write_file(out_path(opt, "histogram.csv"), report.histogram_csv());

  nlohmann::json j;
  j["reps"] = report.reps;
  j["master_seed"] = report.master_seed;
  j["violations_J"] = report.violations_J;
  j["violations_rho"] = report.violations_rho;
  j["violations_argmin_rho"] = report.violations_argmin;
  j["skipped"] = report.skipped;
  write_json(opt, "replicate_summary.json", j);

  const int violations =
      report.violations_J + report.violations_rho + report.violations_argmin;
  std::cout << report.reps << " replications: " << report.violations_J << " cost violations, "
            << report.violations_rho << " rho violations, " << report.violations_argmin
            << " argmin-rho violations, " << report.skipped << " skipped\n";
  return violations > 0 ? kAnalyticFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Average-cost control of composed subsystems: Pareto synthesis and audits"};
  app.require_subcommand(1);
  app.fallthrough();

  Options opt;
  app.add_option("--scenario", opt.scenario,
                 "scenario JSON path, or 'paper' for the built-in example")
      ->capture_default_str();
  app.add_option("--out", opt.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", opt.seed, "master seed")->capture_default_str();
  app.add_option("--norm", opt.norm, "norm: euclidean|max")
      ->check(CLI::IsMember({"euclidean", "max"}))
      ->capture_default_str();
  app.add_option("--tol", opt.tol, "tolerance override");

  auto* validate = app.add_subcommand("validate", "check model assumptions");
  auto* tables = app.add_subcommand("tables", "evaluate and export every factored policy");
  tables->add_flag("--golden", opt.golden, "compare against embedded reference values");
  auto* pareto = app.add_subcommand("pareto", "synthesize the Pareto control policy");
  auto* dp = app.add_subcommand("dp", "average-cost relative value iteration baseline");
  auto* audit = app.add_subcommand("audit", "audit Pareto optimality against enumeration");
  auto* replicate = app.add_subcommand("replicate", "randomized replication study");
  replicate->add_option("--reps", opt.reps, "replication count")->capture_default_str();
  replicate->add_flag("--randomize-transitions", opt.randomize_transitions,
                      "resample transition rows from the simplex");
  for (auto* sub : {validate, tables, pareto, dp, audit, replicate})
    sub->add_option("scenario", opt.scenario,
                    "scenario JSON path, or 'paper' for the built-in example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kUsageFailure;
  }

  try {
    if (validate->parsed()) return cmd_validate(opt);
    if (tables->parsed()) return cmd_tables(opt);
    if (pareto->parsed()) return cmd_pareto(opt);
    if (dp->parsed()) return cmd_dp(opt);
    if (audit->parsed()) return cmd_audit(opt);
    if (replicate->parsed()) return cmd_replicate(opt);
  } catch (const std::runtime_error& e) {
    // I/O level problems (unreadable or unparsable scenario, unwritable out).
    const std::string msg = e.what();
    std::cerr << "error: " << msg << "\n";
    const bool io = msg.find("cannot read") != std::string::npos ||
                    msg.find("not valid JSON") != std::string::npos ||
                    msg.find("cannot write") != std::string::npos;
    return io ? kUsageFailure : kAnalyticFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kAnalyticFailure;
  }
  return kUsageFailure;
}
