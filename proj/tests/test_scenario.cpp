#include "pac/scenario.hpp"

#include "pac/avgcost.hpp"
#include "pac/golden.hpp"
#include "pac/model.hpp"
#include "pac/pareto.hpp"
#include "pac/stationary.hpp"
#include "test_support.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "doctest.h"

using namespace pac;

TEST_CASE("coupled cost matrices reproduce the reference entries of policy 1") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);
  const CostMatrices C = build_cost_matrices(sys, en.at(0));

  // subsystem 1: (W1 + z21 y2) / (y1 (1 + z12))
  CHECK(C.subsystem[0](0, 0) == doctest::Approx((15.0 + 0.43 * 4.9) / (1.25 * 4.8)).epsilon(1e-15));
  CHECK(C.subsystem[0](0, 0) == doctest::Approx(2.85).epsilon(5e-3));
  CHECK(C.subsystem[0](0, 2) == doctest::Approx(3.42).epsilon(5e-3));
  // subsystem 2 uses its own outgoing share in the denominator
  CHECK(C.subsystem[1](0, 0) == doctest::Approx((16.0 + 0.25 * 4.8) / (1.43 * 4.9)).epsilon(1e-15));
  CHECK(C.subsystem[1](0, 0) == doctest::Approx(2.45).epsilon(5e-3));
  // system: (W1 + W2) / (y1 + y2)
  CHECK(C.system(0, 0) == doctest::Approx(31.0 / 9.7).epsilon(1e-15));

  SUBCASE("the alternate denominator convention is available but different") {
    CoupledCostSpec spec;
    spec.W = Vector(2);
    spec.W << 15.0, 16.0;
    spec.z = Matrix::Zero(2, 2);
    spec.z(0, 1) = 0.25;
    spec.z(1, 0) = 0.43;
    spec.alt_denominator = true;
    const CompositeSystem alt(sys.subsystems, make_coupled_cost_model(spec));
    const CostMatrices CA = build_cost_matrices(alt, en.at(0));
    CHECK(CA.subsystem[1](0, 0) == doctest::Approx(17.2 / (4.9 + 0.25 * 4.8)).epsilon(1e-15));
    CHECK(CA.subsystem[0](0, 0) == C.subsystem[0](0, 0));  // subsystem 1 unchanged
  }

  SUBCASE("nonpositive denominators are named") {
    auto subs = sys.subsystems;
    subs[0].output[0](0, 0) = 0.0;
    const CompositeSystem broken(subs, sys.cost_model);
    CHECK_THROWS_WITH_AS(build_cost_matrices(broken, en.at(0)),
                         doctest::Contains("invalid output in cost denominator"),
                         std::domain_error);
  }
}

TEST_CASE("delta aggregation forms for the system cost") {
  auto s1 = test::uniform_subsystem(1, 2);
  s1.output = {Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 4.0)};
  auto s2 = test::uniform_subsystem(1, 1);
  s2.output = {Matrix::Constant(1, 1, 5.0)};

  CoupledCostSpec spec;
  spec.W = Vector(2);
  spec.W << 10.0, 20.0;
  spec.z = Matrix::Zero(2, 2);

  SUBCASE("sum of subsystem costs") {
    spec.system_form = SystemCostForm::SumOfSubsystems;
    const CompositeSystem sys({s1, s2}, make_coupled_cost_model(spec));
    const StageCostPoint pt = stage_costs(sys, 0, {0, 0});
    CHECK(pt.system == doctest::Approx(10.0 / 2.0 + 20.0 / 5.0).epsilon(1e-15));
  }

  SUBCASE("weighted sum") {
    spec.system_form = SystemCostForm::WeightedSum;
    spec.weights = Vector(2);
    spec.weights << 2.0, 0.5;
    const CompositeSystem sys({s1, s2}, make_coupled_cost_model(spec));
    const StageCostPoint pt = stage_costs(sys, 0, {1, 0});
    CHECK(pt.system == doctest::Approx(2.0 * (10.0 / 4.0) + 0.5 * (20.0 / 5.0)).epsilon(1e-15));
  }

  SUBCASE("explicit table over (state, joint action)") {
    spec.system_form = SystemCostForm::Table;
    spec.table = Matrix(1, 2);
    spec.table << 7.0, 3.0;
    const CompositeSystem sys({s1, s2}, make_coupled_cost_model(spec));
    CHECK(stage_costs(sys, 0, {0, 0}).system == 7.0);
    CHECK(stage_costs(sys, 0, {1, 0}).system == 3.0);
    CHECK(pareto_policy(sys).policy.action[0] == JointAction{1, 0});
  }
}

TEST_CASE("the built-in example reproduces the reference tables") {
  const CompositeSystem sys = paper_example();
  CHECK(validate(sys).all_passed());

  const RankedEvaluations ranked = enumerate_and_rank(sys, Objective::system());
  REQUIRE(ranked.canonical.size() == 16);
  for (int p = 0; p < 16; ++p) {
    CHECK(ranked.canonical[p].J_sub[0] ==
          doctest::Approx(golden::kAvgCostSub1[p]).epsilon(golden::kTableTolerance));
    CHECK(ranked.canonical[p].J_sub[1] ==
          doctest::Approx(golden::kAvgCostSub2[p]).epsilon(golden::kTableTolerance));
    CHECK(ranked.canonical[p].J_sys ==
          doctest::Approx(golden::kAvgCostSystem[p]).epsilon(golden::kTableTolerance));
  }
}

TEST_CASE("rho measures distance from the utopia point") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);

  SUBCASE("nonnegative everywhere, and zero iff the utopia point is attained") {
    en.for_each([&](std::uint64_t, const FactoredPolicy& p) { CHECK(rho(sys, p) >= 0.0); });
    // a single-action system attains its utopia point trivially
    const CompositeSystem tiny({test::uniform_subsystem(2, 1)},
                               std::make_shared<test::StubCostModel>(
                                   [](int, Index m, const JointAction&) { return 1.0 + m; }));
    CHECK(rho(tiny, FactoredPolicy{{{0, 0}}}) == 0.0);
  }

  SUBCASE("the system-optimal policy is closer to utopia than policy 1") {
    CHECK(rho(sys, en.at(15)) <= rho(sys, en.at(0)));
  }

  SUBCASE("max norm is available") {
    const double e = rho(sys, en.at(0), Norm::Euclidean);
    const double m = rho(sys, en.at(0), Norm::Max);
    CHECK(m <= e + 1e-15);
  }
}

TEST_CASE("replication study") {
  SUBCASE("small runs are violation-free and deterministic") {
    ReplicationConfig config;
    config.reps = 5;
    config.master_seed = 123;
    const ReplicationReport a = replicate(config);
    const ReplicationReport b = replicate(config);
    CHECK(a.violations_J == 0);
    CHECK(a.violations_rho == 0);
    CHECK(a.violations_argmin == 0);
    CHECK(a.skipped == 0);
    CHECK(a.to_csv() == b.to_csv());
    CHECK(a.histogram_csv() == b.histogram_csv());
    CHECK(a.to_csv().rfind("rep,seed,J_pareto,J_opt,dJ,rho_pareto,rho_opt,drho,argmin_rho_is_pareto\n",
                           0) == 0);
    CHECK(a.histogram_csv().rfind("bin_lo,bin_hi,count_dJ,count_drho\n", 0) == 0);
  }

  SUBCASE("unsampled ranges keep the base outputs, recovering the reference optimum") {
    ReplicationConfig config;
    config.reps = 1;
    config.master_seed = 9;
    config.ranges = {{{0, 0, false}, {0, 0, false}}, {{0, 0, false}, {0, 0, false}}};
    const ReplicationReport rep = replicate(config);
    REQUIRE(rep.rows.size() == 1);
    const CompositeSystem sys = paper_example();
    const RankedEvaluations ranked = enumerate_and_rank(sys, Objective::system());
    CHECK(ranked.best().policy_id == 16);
    CHECK(rep.rows[0].J_opt == ranked.best().J_sys);
    CHECK(rep.rows[0].dJ == 0.0);
  }

  SUBCASE("sampled outputs stay inside their configured ranges") {
    const auto ranges = ReplicationConfig::default_ranges();
    for (std::uint64_t seed : {1u, 7u, 99u}) {
      CounterRng rng(seed);
      const CompositeSystem sys = sample_scenario(paper_example(), ranges, false, rng);
      for (std::size_t i = 0; i < 2; ++i)
        for (int u = 0; u < 2; ++u) {
          const auto& Y = sys.subsystems[i].output[u];
          CHECK(Y.minCoeff() >= ranges[i][u].lo);
          CHECK(Y.maxCoeff() < ranges[i][u].hi);
        }
    }
  }

  SUBCASE("invalid configurations are rejected") {
    ReplicationConfig config;
    config.reps = 0;
    CHECK_THROWS_AS(replicate(config), std::invalid_argument);
    config.reps = 1;
    config.ranges = {{{-1.0, 3.0, true}, {8.0, 10.0, true}}, {{2.0, 4.0, true}, {9.0, 12.0, true}}};
    CHECK_THROWS_AS(replicate(config), std::invalid_argument);
  }
}

TEST_CASE("heterogeneous state sizes run through the full pipeline") {
  const CompositeSystem sys = load_scenario(TEST_DATA_DIR "/coupled_pair.json");
  REQUIRE(sys.num_states() == 6);
  CHECK(validate(sys).all_passed());

  const PolicyEnumerator en(sys);
  CHECK(en.count() == 4 * 8);
  en.for_each([&](std::uint64_t, const FactoredPolicy& p) {
    const Matrix P = composite_transition(sys, p);
    CHECK(P.rows() == 6);
    CHECK((stationary_factored(sys, p) - stationary_direct(P)).cwiseAbs().maxCoeff() < 1e-10);
  });

  const RankedEvaluations ranked = enumerate_and_rank(sys, Objective::system());
  const RviResult dp = relative_value_iteration(sys);
  CHECK(std::abs(dp.gain - ranked.best().J_sys) < 1e-6);

  const ParetoReport pareto = pareto_policy(sys);
  const double J_pareto = evaluate_policy(sys, pareto.policy).J_sys;
  CHECK(J_pareto == doctest::Approx(ranked.best().J_sys).epsilon(1e-9));
}

TEST_CASE("parallel fan-out merges deterministically under the thread cap") {
  const CompositeSystem sys = paper_example();
  setenv("PARETO_AVGCOST_THREADS", "1", 1);
  const std::string serial = enumerate_and_rank(sys, Objective::system()).to_csv();
  setenv("PARETO_AVGCOST_THREADS", "4", 1);
  const std::string parallel = enumerate_and_rank(sys, Objective::system()).to_csv();
  unsetenv("PARETO_AVGCOST_THREADS");
  CHECK(serial == parallel);

  ReplicationConfig config;
  config.reps = 8;
  config.master_seed = 5;
  setenv("PARETO_AVGCOST_THREADS", "3", 1);
  const std::string csv = replicate(config).to_csv();
  unsetenv("PARETO_AVGCOST_THREADS");
  CHECK(csv == replicate(config).to_csv());
}

TEST_CASE("scenario JSON round-trips the built-in example") {
  const CompositeSystem sys = paper_example();
  const nlohmann::json j = scenario_to_json(sys);
  const CompositeSystem back = scenario_from_json(j);

  CHECK(back.num_subsystems() == 2);
  CHECK(back.subsystems[0].actions == sys.subsystems[0].actions);
  for (int i = 0; i < 2; ++i)
    for (int u = 0; u < 2; ++u) {
      CHECK(back.subsystems[i].transition[u] == sys.subsystems[i].transition[u]);
      CHECK(back.subsystems[i].output[u] == sys.subsystems[i].output[u]);
    }

  const RankedEvaluations a = enumerate_and_rank(sys, Objective::system());
  const RankedEvaluations b = enumerate_and_rank(back, Objective::system());
  for (int p = 0; p < 16; ++p) CHECK(a.canonical[p].J_sys == b.canonical[p].J_sys);

  SUBCASE("admissible sets are 1-based on the wire") {
    nlohmann::json restricted = j;
    restricted["subsystems"][0]["admissible"] = {{1}, {1, 2}};
    const CompositeSystem sys2 = scenario_from_json(restricted);
    CHECK(sys2.subsystems[0].admissible[0] == std::vector<int>{0});
    CHECK(PolicyEnumerator(sys2).count() == 8);
  }

  SUBCASE("unknown cost forms are rejected") {
    nlohmann::json bad = j;
    bad["cost"]["form"] = "mystery";
    CHECK_THROWS_AS(scenario_from_json(bad), std::invalid_argument);
  }

  SUBCASE("missing files and invalid JSON are runtime errors") {
    CHECK_THROWS_WITH_AS(load_scenario("/nonexistent/file.json"),
                         doctest::Contains("cannot read"), std::runtime_error);
  }
}
