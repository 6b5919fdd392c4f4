#include "pac/kron.hpp"

#include "pac/model.hpp"
#include "pac/rng.hpp"
#include "pac/scenario.hpp"
#include "test_support.hpp"

#include "doctest.h"

using namespace pac;

namespace {

Matrix random_matrix(CounterRng& rng, Index r, Index c) {
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
  return m;
}

Matrix random_stochastic(CounterRng& rng, Index n) {
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) m.row(i) = rng.simplex_row(static_cast<int>(n));
  return m;
}

}  // namespace

TEST_CASE("kron of the example policy matrices reproduces the composite rows") {
  Matrix P1(2, 2), P2(2, 2);
  P1 << 0.7, 0.3, 0.4, 0.6;
  P2 << 0.5, 0.5, 0.45, 0.55;
  const Matrix P = kron(P1, P2);
  REQUIRE(P.rows() == 4);
  Matrix expected(4, 4);
  expected << 0.35, 0.35, 0.15, 0.15,
              0.315, 0.385, 0.135, 0.165,
              0.2, 0.2, 0.3, 0.3,
              0.18, 0.22, 0.27, 0.33;
  CHECK((P - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("kron identities") {
  CHECK(kron(Matrix::Identity(2, 2), Matrix::Identity(3, 3)) == Matrix::Identity(6, 6));

  CounterRng rng(3);
  SUBCASE("mixed product (A kron B)(x kron y) = (Ax) kron (By)") {
    for (int t = 0; t < 10; ++t) {
      const Matrix A = random_matrix(rng, 2, 2), B = random_matrix(rng, 3, 3);
      const Matrix x = random_matrix(rng, 2, 1), y = random_matrix(rng, 3, 1);
      const Matrix lhs = kron(A, B) * kron(x, y);
      const Matrix rhs = kron((A * x).eval(), (B * y).eval());
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("associativity on random triples") {
    for (int t = 0; t < 10; ++t) {
      const Matrix A = random_matrix(rng, 2, 2), B = random_matrix(rng, 2, 3),
                   C = random_matrix(rng, 3, 2);
      const Matrix lhs = kron(kron(A, B).eval(), C);
      const Matrix rhs = kron(A, kron(B, C).eval());
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("kron of row-stochastic matrices stays row-stochastic") {
    for (int t = 0; t < 10; ++t) {
      const Matrix P = kron(random_stochastic(rng, 3), random_stochastic(rng, 4));
      for (Index m = 0; m < P.rows(); ++m) CHECK(P.row(m).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  SUBCASE("compositions past the cap are refused") {
    const Matrix big = Matrix::Identity(100, 100);
    CHECK_THROWS_WITH_AS(kron(big, big, 4096), "composition too large", std::length_error);
  }
}

TEST_CASE("composite_transition agrees with the per-entry product oracle") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);
  en.for_each([&](std::uint64_t, const FactoredPolicy& p) {
    const Matrix P = composite_transition(sys, p);
    const Matrix oracle = test::brute_composite_transition(sys, p);
    CHECK(P == oracle);  // both are plain products of two factors
    for (Index m = 0; m < P.rows(); ++m) CHECK(P.row(m).sum() == doctest::Approx(1.0).epsilon(1e-12));
  });

  SUBCASE("policy 1 equals the printed matrix") {
    Matrix expected(4, 4);
    expected << 0.35, 0.35, 0.15, 0.15,
                0.315, 0.385, 0.135, 0.165,
                0.2, 0.2, 0.3, 0.3,
                0.18, 0.22, 0.27, 0.33;
    CHECK((composite_transition(sys, en.at(0)) - expected).cwiseAbs().maxCoeff() < 1e-15);
  }

  SUBCASE("single subsystem: the composite matrix is the policy matrix") {
    auto sub = test::uniform_subsystem(3, 2);
    CounterRng rng(5);
    for (int u = 0; u < 2; ++u) sub.transition[u] = random_stochastic(rng, 3);
    const CompositeSystem solo({sub}, std::make_shared<test::StubCostModel>(
                                          [](int, Index, const JointAction&) { return 1.0; }));
    const FactoredPolicy p{{{1, 0, 1}}};
    CHECK(composite_transition(solo, p) == solo.subsystems[0].policy_matrix(p.action[0]));
  }
}

TEST_CASE("composite_transition_general handles lifted and non-factored policies") {
  const CompositeSystem sys = paper_example();
  const PolicyEnumerator en(sys);

  en.for_each([&](std::uint64_t, const FactoredPolicy& p) {
    CHECK(composite_transition_general(sys, lift_policy(p, sys)) == composite_transition(sys, p));
  });

  SUBCASE("a hand-built non-factored policy has product rows") {
    CompositePolicy p = lift_policy(en.at(0), sys);
    p.action[0] = {1, 1};  // subsystem actions at (1,1) differ from (1,2)/(2,1)
    const Matrix P = composite_transition_general(sys, p);
    for (Index m = 0; m < 4; ++m) {
      CHECK(P.row(m).sum() == doctest::Approx(1.0).epsilon(1e-12));
      for (Index k = 0; k < 4; ++k) {
        double prod = 1.0;
        for (int i = 0; i < 2; ++i)
          prod *= sys.subsystems[i].prob(sys.indexer.state_of(m, i), p.action[m][i],
                                         sys.indexer.state_of(k, i));
        CHECK(P(m, k) == prod);
      }
    }
  }
}
