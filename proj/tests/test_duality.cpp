#include "pac/duality.hpp"

#include "pac/avgcost.hpp"
#include "pac/model.hpp"
#include "pac/scenario.hpp"
#include "test_support.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "doctest.h"

using namespace pac;

TEST_CASE("psi recovers the long-run average cost bit-for-bit") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);
  en.for_each([&](std::uint64_t idx, const FactoredPolicy& p) {
    CHECK(psi(sys, p) == evaluate_policy(sys, p, idx + 1).J_sys);
  });
  CHECK(psi(sys, en.at(0)) == doctest::Approx(2.7557).epsilon(5e-3));

  SUBCASE("zero costs give zero") {
    const CompositeSystem zero(sys.subsystems, std::make_shared<test::StubCostModel>(
                                                   [](int, Index, const JointAction&) { return 0.0; }));
    CHECK(psi(zero, en.at(7)) == 0.0);
  }
}

TEST_CASE("lambda points sit on the vertical axis") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);
  const Vector zero_q = Vector::Zero(4);

  SUBCASE("q = 0 reduces phi to the norm of the stage-cost vector") {
    const FactoredPolicy p1 = en.at(0);
    const LambdaPoint pt = lambda_point(sys, p1, zero_q);
    const Vector k = evaluate_policy(sys, p1).k_sys;
    CHECK(pt.phi == doctest::Approx(k.norm()).epsilon(1e-15));
    CHECK(pt.theta_residual < 1e-10);
    CHECK(lambda_point(sys, p1, zero_q, Norm::Max).phi ==
          doctest::Approx(k.lpNorm<Eigen::Infinity>()).epsilon(1e-15));
  }

  SUBCASE("theta vanishes for every policy and random q") {
    CounterRng rng(11);
    en.for_each([&](std::uint64_t, const FactoredPolicy& p) {
      Vector q(4);
      for (Index i = 0; i < 4; ++i) q(i) = rng.uniform(-50.0, 50.0);
      CHECK(lambda_point(sys, p, q).theta_residual < 1e-10);
    });
  }

  SUBCASE("constant q shifts nothing: M q = 0 on the all-ones direction") {
    const FactoredPolicy p = en.at(9);
    const double phi0 = lambda_point(sys, p, zero_q).phi;
    for (double c : {-3.0, 1.0, 250.0})
      CHECK(lambda_point(sys, p, Vector::Constant(4, c)).phi == doctest::Approx(phi0).epsilon(1e-9));
  }
}

TEST_CASE("the Lagrangian is nu-independent on the feasible set") {
  const CompositeSystem sys = paper_example();
  const FactoredPolicy p1 = PolicyEnumerator(sys).at(0);
  const Vector q = Vector::Zero(4);
  const double phi = lambda_point(sys, p1, q).phi;

  CHECK(lagrangian(sys, p1, q, Vector::Zero(4)) == phi);

  CounterRng rng(5);
  for (int t = 0; t < 20; ++t) {
    Vector nu(4);
    for (Index i = 0; i < 4; ++i) nu(i) = rng.uniform(-1e3, 1e3);
    CHECK(std::abs(lagrangian(sys, p1, q, nu) - phi) <= 1e-8);
  }
}

TEST_CASE("min_common and max_crossing collapse without a duality gap") {
  const CompositeSystem sys = paper_example();
  const Vector q = Vector::Zero(4);

  const MinCommonResult mc = min_common(sys, q, Norm::Euclidean);

  SUBCASE("min_common equals the exhaustive 16-policy scan") {
    const PolicyEnumerator en(sys);
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t best_id = 0;
    en.for_each([&](std::uint64_t idx, const FactoredPolicy& p) {
      const double phi = lambda_point(sys, p, q).phi;
      if (phi < best) {
        best = phi;
        best_id = idx + 1;
      }
    });
    CHECK(mc.policy_id == best_id);
    CHECK(mc.phi_star == best);
  }

  SUBCASE("constant q does not move the argmin") {
    CHECK(min_common(sys, Vector::Constant(4, 17.0), Norm::Euclidean).policy_id == mc.policy_id);
  }

  SUBCASE("max crossing reaches the min common point") {
    const MaxCrossingResult cross = max_crossing(sys, q, Norm::Euclidean);
    CHECK(std::abs(cross.b_star - mc.phi_star) <= 1e-8);
    CHECK(cross.b_star <= mc.phi_star + 1e-10);  // weak duality
  }

  SUBCASE("weak duality holds across random scenarios and q") {
    CounterRng rng(23);
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const CompositeSystem rnd = test::random_family_scenario(seed);
      Vector q_rnd(rnd.num_states());
      for (Index i = 0; i < q_rnd.size(); ++i) q_rnd(i) = rng.uniform(-10.0, 10.0);
      const Norm norm = seed % 2 == 0 ? Norm::Euclidean : Norm::Max;
      CHECK(max_crossing(rnd, q_rnd, norm).b_star <= min_common(rnd, q_rnd, norm).phi_star + 1e-10);
    }
  }

  SUBCASE("a single-policy system crosses at its own phi") {
    const CompositeSystem tiny({test::uniform_subsystem(2, 1)},
                               std::make_shared<test::StubCostModel>(
                                   [](int, Index m, const JointAction&) { return 1.0 + m; }));
    const Vector q1 = Vector::Zero(2);
    const double phi = lambda_point(tiny, FactoredPolicy{{{0, 0}}}, q1).phi;
    CHECK(min_common(tiny, q1, Norm::Euclidean).phi_star == phi);
    CHECK(max_crossing(tiny, q1, Norm::Euclidean).b_star == doctest::Approx(phi).epsilon(1e-12));
  }
}

TEST_CASE("the optimality audit certifies the Pareto policy") {
  const CompositeSystem sys = paper_example();
  const Vector q = Vector::Zero(4);
  const OptimalityAudit audit = pareto_optimality_audit(sys, q);

  CHECK(audit.best_policy == 16);
  CHECK(audit.pareto_gap == 0.0);  // identical evaluation path, not merely close
  CHECK(audit.pareto_is_lift_of_best);
  CHECK(audit.all_elementwise_ok);
  CHECK(audit.norm_dominance_ok);
  CHECK(audit.weak_duality_margin >= -1e-10);
  CHECK(audit.b_star <= audit.phi_star + 1e-10);
  REQUIRE(audit.rows.size() == 16);
  for (const auto& row : audit.rows) {
    CHECK(row.theta_residual < 1e-10);
    CHECK(row.elementwise_ok);
  }

  SUBCASE("psi in the audit equals the evaluation pipeline") {
    const PolicyEnumerator en(sys);
    for (const auto& row : audit.rows)
      CHECK(row.psi == evaluate_policy(sys, en.at(row.policy_id - 1)).J_sys);
  }

  SUBCASE("csv export ends with the summary row") {
    const std::string csv = audit.to_csv();
    CHECK(csv.rfind("policy,psi,phi,theta_residual,elementwise_thm1_ok,phi_star,b_star,gap\n", 0) ==
          0);
    CHECK(csv.find("\nsummary,") != std::string::npos);
  }

  SUBCASE("audits hold on random scenarios") {
    for (std::uint64_t seed = 31; seed <= 40; ++seed) {
      const CompositeSystem rnd = test::random_family_scenario(seed);
      const OptimalityAudit a = pareto_optimality_audit(rnd, Vector::Zero(rnd.num_states()));
      CHECK(std::abs(a.pareto_gap) <= 1e-9);
      CHECK(a.all_elementwise_ok);
      CHECK(a.weak_duality_margin >= -1e-10);
    }
  }

  SUBCASE("single-policy systems pass trivially") {
    const CompositeSystem tiny({test::uniform_subsystem(2, 1)},
                               std::make_shared<test::StubCostModel>(
                                   [](int, Index m, const JointAction&) { return 1.0 + m; }));
    const OptimalityAudit a = pareto_optimality_audit(tiny, Vector::Zero(2));
    CHECK(a.pareto_gap == 0.0);
    CHECK(a.best_policy == 1);
    CHECK(a.all_elementwise_ok);
  }
}
