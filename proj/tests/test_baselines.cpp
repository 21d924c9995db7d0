#include <doctest.h>

#include <cmath>
#include <random>

#include "ibcn/baselines.hpp"
#include "support/builders.hpp"

using namespace ibcn;
namespace ts = testing_support;

namespace {
Vector vec(std::initializer_list<double> vals) {
  Vector v(static_cast<Index>(vals.size()));
  Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

SolverConfig sweep_config(Index q, std::uint64_t seed, long long iters) {
  SolverConfig cfg;
  cfg.selection = SelectionRule::max_abs_fill(q);
  cfg.seed = seed;
  cfg.max_iters = iters;
  return cfg;
}
}  // namespace

TEST_CASE("bcd1_direction is the negated gradient") {
  const Vector g = vec({2, 0, -3});
  const Vector d = bcd1_direction(g);
  CHECK(d == vec({-2, 0, 3}));
  CHECK(g.dot(d) < 0);
  CHECK(d.norm() == doctest::Approx(g.norm()));
  CHECK_THROWS_AS(bcd1_direction(Vector::Zero(2)), Error);
}

TEST_CASE("bcd2_direction clamps the diagonal") {
  const Vector g = vec({1, 1, 1});
  CHECK(bcd2_direction(g, vec({1e-5, 1, 1}))[0] == doctest::Approx(-1.0 / 1e-2));
  CHECK(bcd2_direction(g, vec({1e10, 1, 1}))[0] == doctest::Approx(-1.0 / 1e9));
  CHECK(bcd2_direction(g, vec({1, 1, 1})) == -g);

  std::mt19937_64 rng(191);
  for (int rep = 0; rep < 50; ++rep) {
    const Vector gg = ts::random_vector(4, rng);
    if (gg.norm() == 0) continue;
    const Vector hh = ts::random_vector(4, rng, 100.0);
    CHECK(gg.dot(bcd2_direction(gg, hh)) < 0);  // clamped scaling keeps descent
  }
}

TEST_CASE("armijo accepts the unit step on a gentle quadratic") {
  // f = ||x||^2/2 at x = e1, direction -e1 over block {1}
  std::mt19937_64 rng(193);
  const QuadraticObjective prob(Matrix::Identity(3, 3), Vector::Zero(3));
  Vector x0 = Vector::Zero(3);
  x0[0] = 1.0;
  auto session = make_session(prob, x0);
  const BlockIndex I({0}, 3);
  const Vector g = vec({1});
  const Vector d = vec({-1});
  ArmijoOptions opts;
  const ArmijoResult res = armijo_search(session, I, d, 0.5, g, opts);
  CHECK(res.alpha == 1.0);
  CHECK(res.f_new == doctest::Approx(0.0));

  // a hugely overshooting direction forces backtracking
  const Vector big = vec({-1e6});
  const ArmijoResult bt = armijo_search(session, I, big, 0.5, g, opts);
  CHECK(bt.alpha < 1.0);
  CHECK(bt.alpha * 1e6 <= 2.0);  // step length comes back to a sane scale
  CHECK(bt.f_new <= 0.5);

  CHECK_THROWS_AS(armijo_search(session, I, vec({1}), 0.5, g, opts), Error);  // ascent

  ArmijoOptions tight;
  tight.max_backtracks = 3;
  CHECK_THROWS_AS(armijo_search(session, I, big, 0.5, g, tight), LineSearchError);
}

TEST_CASE("a vanishing sufficient-decrease constant accepts any decrease") {
  const QuadraticObjective prob(Matrix::Identity(2, 2), Vector::Zero(2));
  Vector x0 = Vector::Zero(2);
  x0[0] = 1.0;
  auto session = make_session(prob, x0);
  const BlockIndex I({0}, 2);
  const Vector g = vec({1});
  const Vector d = vec({-1.5});  // overshoots, leaving only a small decrease

  ArmijoOptions lax;
  lax.c = 1e-12;
  CHECK(armijo_search(session, I, d, 0.5, g, lax).alpha == 1.0);

  ArmijoOptions strict;
  strict.c = 0.4;  // demands most of the predicted decrease
  CHECK(armijo_search(session, I, d, 0.5, g, strict).alpha < 1.0);
}

TEST_CASE("unit-curvature quadratic is solved by plain block descent") {
  // with Q = I the steepest step at alpha = 1 minimizes each block exactly
  std::mt19937_64 rng(211);
  const QuadraticObjective prob(Matrix::Identity(8, 8), ts::random_vector(8, rng));
  GreedyBcd solver(prob, Vector::Zero(8), sweep_config(2, 3, 100), BcdVariant::first_order);
  while (solver.iterations_done() < 100 && !solver.done()) {
    const IterRecord rec = solver.step();
    CHECK(rec.inner_iters == 0);  // alpha = 1 always accepted
    if (solver.grad_norm() <= 1e-12) break;
  }
  CHECK(solver.grad_norm() <= 1e-12);
}

TEST_CASE("both baselines produce monotone traces") {
  auto gen = generate_sparse_ls(20, 25, 0.2, 1e-3, 77);
  for (const BcdVariant variant : {BcdVariant::first_order, BcdVariant::diag_second_order}) {
    const Trace t = run_baseline(gen.objective, Vector::Zero(25), sweep_config(4, 5, 60), variant);
    REQUIRE(t.rows.size() == 60);
    t.validate();
    CHECK(t.meta.solver == std::string(variant == BcdVariant::first_order ? "bcd1" : "bcd2"));
    for (const TraceRow& r : t.rows) CHECK(r.sigma == 0.0);
  }
}

TEST_CASE("identical seeds give identical block sequences when iterates agree") {
  // unit-diagonal quadratic: bcd2's scaling is the identity, so both
  // baselines produce the same iterates and must pick the same blocks
  std::mt19937_64 rng(197);
  Matrix Q = ts::random_spd(10, rng, 0.5, 1.5);
  for (Index i = 0; i < 10; ++i) {
    const double s = 1.0 / std::sqrt(Q(i, i));
    Q.row(i) *= s;
    Q.col(i) *= s;
  }
  for (Index i = 0; i < 10; ++i) Q(i, i) = 1.0;  // exact, so bcd2's scaling is the identity
  const QuadraticObjective prob(Q, ts::random_vector(10, rng));
  const Vector x0 = ts::random_vector(10, rng);

  GreedyBcd a(prob, x0, sweep_config(3, 99, 40), BcdVariant::first_order);
  GreedyBcd b(prob, x0, sweep_config(3, 99, 40), BcdVariant::diag_second_order);
  for (int k = 0; k < 40; ++k) {
    if (a.done() || b.done()) break;
    const IterRecord ra = a.step();
    const IterRecord rb = b.step();
    CHECK(ra.block == rb.block);
    CHECK(ra.step == rb.step);
  }
}

TEST_CASE("diagonal scaling pays off on badly scaled problems") {
  // diagonal quadratic with a 1e4 condition number
  const Index n = 20;
  Matrix Q = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) Q(i, i) = std::pow(10.0, 4.0 * double(i) / double(n - 1));
  std::mt19937_64 rng(199);
  const QuadraticObjective prob(Q, ts::random_vector(n, rng));
  const double fstar = prob.min_value();

  auto iters_to_tol = [&](BcdVariant variant) {
    GreedyBcd solver(prob, Vector::Zero(n), sweep_config(4, 31, 4000), variant);
    long long k = 0;
    while (k < 4000 && solver.f() - fstar > 1e-6 && !solver.done()) {
      solver.step();
      ++k;
    }
    return k;
  };
  const long long k1 = iters_to_tol(BcdVariant::first_order);
  const long long k2 = iters_to_tol(BcdVariant::diag_second_order);
  CHECK(k2 < k1);
}

TEST_CASE("line search failure records an unchanged iterate") {
  auto gen = generate_sparse_ls(10, 12, 0.3, 1e-3, 88);
  SolverConfig cfg = sweep_config(2, 7, 5);
  ArmijoOptions armijo;
  armijo.max_backtracks = 0;
  armijo.initial_step = 1e14;  // the sole candidate step is hopeless
  GreedyBcd solver(gen.objective, Vector::Zero(12), cfg, BcdVariant::first_order, armijo);
  const Vector before = solver.x();
  const IterRecord rec = solver.step();
  CHECK_FALSE(rec.success);
  CHECK(solver.x() == before);
  CHECK(solver.f() == rec.f_before);
}
