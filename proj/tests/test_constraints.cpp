#include <catch2/catch_amalgamated.hpp>

#include <cstring>

#include "pcdef/constraints.hpp"

using namespace pcdef;

namespace {

// Draw a random point of S = {||a||_p <= eps, nnz <= n}: random support of
// size <= n, random direction, random radius.
Vec random_feasible(std::size_t k, const ConstraintSet& S, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  std::size_t support = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(
                                                         std::min(S.n, k)));
  support = std::min(support, std::min(S.n, k));
  Vec a(k, 0.0);
  for (std::size_t t = 0; t < support; ++t) a[idx[t]] = normal(rng);
  double norm = lp_norm(a, S.p);
  if (norm == 0.0) return a;
  double radius = S.epsilon * unit(rng);
  for (double& x : a) x *= radius / norm;
  return a;
}

}  // namespace

TEST_CASE("top_n keeps the largest magnitudes") {
  CHECK(top_n({3.0, -4.0, 1.0}, 2) == Vec{3.0, -4.0, 0.0});
  CHECK(top_n({1.0, 1.0, 1.0}, 1) == Vec{1.0, 0.0, 0.0});
  Vec v = {0.5, -2.0, 0.25};
  CHECK(top_n(v, 3) == v);
  CHECK_THROWS_AS(top_n(v, 0), invalid_input);
  CHECK_THROWS_AS(top_n(v, 4), invalid_input);
}

TEST_CASE("constraint set membership") {
  ConstraintSet S(2.0, 1.0, 2);
  CHECK(S.contains({0.6, 0.8, 0.0}));
  CHECK_FALSE(S.contains({0.9, 0.9, 0.0}));     // norm too large
  CHECK_FALSE(S.contains({0.5, 0.5, 0.5}));     // too many nonzeros
  ConstraintSet zero(2.0, 0.0, 2);
  CHECK(zero.contains({0.0, 0.0, 0.0}));
  CHECK_FALSE(zero.contains({1e-6, 0.0, 0.0}));
  CHECK_THROWS_AS(ConstraintSet(0.5, 1.0, 1), invalid_input);
  CHECK_THROWS_AS(ConstraintSet(2.0, -1.0, 1), invalid_input);
  CHECK_THROWS_AS(ConstraintSet(2.0, 1.0, 0), invalid_input);
}

TEST_CASE("constrained_argmax closed forms") {
  SECTION("p = 2 circle case") {
    ArgmaxResult r = constrained_argmax({3.0, 4.0}, ConstraintSet(2.0, 1.0, 2));
    CHECK(r.a[0] == Catch::Approx(0.6).margin(1e-12));
    CHECK(r.a[1] == Catch::Approx(0.8).margin(1e-12));
    CHECK(r.value == Catch::Approx(5.0).margin(1e-12));
    // Brute-force oracle on the unit circle.
    double best = 0.0;
    for (int i = 0; i < 100000; ++i) {
      double t = 2.0 * M_PI * i / 100000.0;
      best = std::max(best, 3.0 * std::cos(t) + 4.0 * std::sin(t));
    }
    CHECK(r.value == Catch::Approx(best).margin(1e-3));
  }
  SECTION("p = inf sign map") {
    ArgmaxResult r = constrained_argmax({1.0, -2.0, 0.0}, ConstraintSet(inf_norm_order, 0.5, 3));
    CHECK(r.a == Vec{0.5, -0.5, 0.0});
    CHECK(r.value == Catch::Approx(1.5).margin(1e-12));
    // Exhaustive grid {-0.5, 0, 0.5}^3.
    double best = -1e9;
    for (int i = -1; i <= 1; ++i)
      for (int j = -1; j <= 1; ++j)
        for (int l = -1; l <= 1; ++l)
          best = std::max(best, 0.5 * i * 1.0 + 0.5 * j * -2.0 + 0.5 * l * 0.0);
    CHECK(r.value == Catch::Approx(best).margin(1e-12));
  }
  SECTION("sparsity n = 1 picks the largest coordinate") {
    ArgmaxResult r = constrained_argmax({3.0, 4.0}, ConstraintSet(2.0, 2.0, 1));
    CHECK(r.a == Vec{0.0, 2.0});
    CHECK(r.value == Catch::Approx(8.0).margin(1e-12));
  }
  SECTION("eps = 0 returns zero") {
    ArgmaxResult r = constrained_argmax({3.0, 4.0}, ConstraintSet(2.0, 0.0, 2));
    CHECK(r.a == Vec{0.0, 0.0});
    CHECK(r.value == 0.0);
  }
  SECTION("zero vector on the support is degenerate") {
    CHECK_THROWS_AS(constrained_argmax({0.0, 0.0}, ConstraintSet(2.0, 1.0, 2)),
                    degenerate_gradient);
  }
  SECTION("p = 1 limit: single largest coordinate, lowest index on ties") {
    ArgmaxResult r = constrained_argmax({2.0, -2.0, 1.0}, ConstraintSet(1.0, 0.5, 3));
    CHECK(r.a == Vec{0.5, 0.0, 0.0});
    CHECK(r.value == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("constrained_argmax dominates random feasible points") {
  Rng rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double p_choices[] = {1.5, 2.0, 3.0, inf_norm_order};
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = 2 + static_cast<std::size_t>(unit(rng) * 7.0);
    k = std::min<std::size_t>(k, 8);
    Vec v(k);
    for (double& x : v) x = normal(rng);
    double p = p_choices[trial % 4];
    std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(k));
    n = std::min(n, k);
    double eps = 0.1 + unit(rng);
    ConstraintSet S(p, eps, n);
    ArgmaxResult r = constrained_argmax(v, S);
    REQUIRE(std::abs(lp_norm(r.a, p) - eps) < 1e-9);
    REQUIRE(nnz(r.a) <= n);
    CHECK(r.value == Catch::Approx(dot(r.a, v)).margin(1e-9));
    int violations = 0;
    for (int s = 0; s < 2000; ++s) {
      Vec a = random_feasible(k, S, rng);
      if (dot(a, v) > r.value + 1e-9) ++violations;
    }
    REQUIRE(violations == 0);
  }
}

TEST_CASE("step_update closed forms") {
  CHECK(step_update({0.0, 5.0}, 0.1, 2.0) == Vec{0.0, 0.1});
  Vec u = step_update({2.0, -1.0}, 0.3, inf_norm_order);
  CHECK(u == Vec{0.3, -0.3});
  Vec u2 = step_update({3.0, 4.0}, 1.0, 2.0);
  CHECK(u2[0] == Catch::Approx(0.6).margin(1e-12));
  CHECK(u2[1] == Catch::Approx(0.8).margin(1e-12));
  CHECK_THROWS_AS(step_update({0.0, 0.0}, 0.1, 2.0), degenerate_gradient);
  CHECK_THROWS_AS(step_update({1.0, 1.0}, 0.0, 2.0), invalid_input);
  // ||u||_p = alpha within 1e-12 for assorted p.
  Rng rng(5);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double p : {1.5, 2.0, 4.0, inf_norm_order}) {
    Vec g(4);
    for (double& x : g) x = normal(rng);
    CHECK(std::abs(lp_norm(step_update(g, 0.25, p), p) - 0.25) < 1e-12);
  }
}

TEST_CASE("project closed forms and examples") {
  CHECK(project({3.0, 4.0}, ConstraintSet(2.0, 10.0, 2)) == Vec{3.0, 4.0});
  Vec y = project({3.0, 4.0}, ConstraintSet(2.0, 1.0, 2));
  CHECK(y[0] == Catch::Approx(0.6).margin(1e-12));
  CHECK(y[1] == Catch::Approx(0.8).margin(1e-12));
  CHECK(project({0.3, -0.9}, ConstraintSet(inf_norm_order, 0.5, 2)) == Vec{0.3, -0.5});
  CHECK(project({3.0, 4.0}, ConstraintSet(2.0, 10.0, 1)) == Vec{0.0, 4.0});
  CHECK_THROWS_AS(project({1.0, 1.0}, ConstraintSet(3.0, 1.0, 2)), unsupported_norm);
}

TEST_CASE("projection is idempotent, contractive, and grid-optimal") {
  Rng rng(99);
  std::normal_distribution<double> normal(0.0, 1.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t k = 1 + trial % 3;
    double p = trial % 2 ? 2.0 : inf_norm_order;
    std::size_t n = 1 + static_cast<std::size_t>(unit(rng) * static_cast<double>(k));
    n = std::min(n, k);
    double eps = 0.2 + unit(rng);
    ConstraintSet S(p, eps, n);
    Vec x(k);
    for (double& v : x) v = normal(rng);
    Vec y = project(x, S);
    REQUIRE(S.contains(y, 1e-9));
    // Idempotence, bit-exact.
    Vec yy = project(y, S);
    REQUIRE(std::memcmp(y.data(), yy.data(), k * sizeof(double)) == 0);
    // Contraction in the constraint norm.
    REQUIRE(lp_norm(y, p) <= lp_norm(x, p) + 1e-12);
    // Optimality against random feasible points.
    double dy = 0.0;
    for (std::size_t i = 0; i < k; ++i) dy += (x[i] - y[i]) * (x[i] - y[i]);
    int closer = 0;
    for (int s = 0; s < 20000; ++s) {
      Vec a = random_feasible(k, S, rng);
      double da = 0.0;
      for (std::size_t i = 0; i < k; ++i) da += (x[i] - a[i]) * (x[i] - a[i]);
      if (da < dy - 1e-6) ++closer;
    }
    REQUIRE(closer == 0);
  }
}

TEST_CASE("beta_p constants") {
  CHECK(beta_p(2.0, 17) == 1.0);
  CHECK(beta_p(inf_norm_order, 4) == 1.0);
  CHECK(beta_p(inf_norm_order, 9, BetaVariant::L2VsLr) == Catch::Approx(3.0).margin(1e-12));
  CHECK(beta_p(1.5, 8) == Catch::Approx(std::pow(8.0, 1.0 / 1.5 - 0.5)).margin(1e-12));
  CHECK_THROWS_AS(beta_p(1.0, 4), invalid_input);
  CHECK_THROWS_AS(beta_p(2.0, 0), invalid_input);
}

TEST_CASE("g_exponent branches") {
  CHECK(g_exponent(2.0) == Catch::Approx(-0.5).margin(1e-15));
  CHECK(g_exponent(4.0) == Catch::Approx(0.0).margin(1e-15));
  CHECK(g_exponent(inf_norm_order) == Catch::Approx(0.5).margin(1e-15));
  CHECK_THROWS_AS(g_exponent(1.0), invalid_input);
}
