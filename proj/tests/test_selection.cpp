#include <doctest.h>

#include <cmath>
#include <random>

#include "ibcn/selection.hpp"
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

bool contains(const BlockIndex& I, Index i) {
  for (Index j : I.indices())
    if (j == i) return true;
  return false;
}
}  // namespace

TEST_CASE("max_abs_fill keeps the dominant coordinate") {
  const Vector grad = vec({2, -1, 0, -3, 4});
  std::mt19937_64 rng(61);

  const BlockIndex single = select_max_abs_fill(grad, 1, rng);
  CHECK(single.size() == 1);
  CHECK(single[0] == 4);  // variable 5

  for (int rep = 0; rep < 20; ++rep) {
    const BlockIndex I = select_max_abs_fill(grad, 3, rng);
    CHECK(I.size() == 3);
    CHECK(contains(I, 4));
    CHECK(gather(grad, I).norm() >= grad.norm() / std::sqrt(3.0) - 1e-15);
  }

  const BlockIndex full = select_max_abs_fill(grad, 5, rng);
  CHECK(full == BlockIndex::full(5));
}

TEST_CASE("max_abs_fill argmax ties break to the lowest index") {
  const Vector grad = vec({-2, 2, 2});
  std::mt19937_64 rng(67);
  const BlockIndex I = select_max_abs_fill(grad, 1, rng);
  CHECK(I[0] == 0);
}

TEST_CASE("max_abs_fill is deterministic under the seed") {
  std::mt19937_64 rng_a(71), rng_b(71);
  std::mt19937_64 data_rng(73);
  for (int rep = 0; rep < 10; ++rep) {
    const Vector grad = ts::random_vector(40, data_rng);
    const BlockIndex a = select_max_abs_fill(grad, 7, rng_a);
    const BlockIndex b = select_max_abs_fill(grad, 7, rng_b);
    CHECK(a == b);
  }
}

TEST_CASE("partition selection takes the largest-norm block") {
  const Vector grad = vec({2, -1, 0, -3, 4});
  const std::vector<BlockIndex> partition{BlockIndex({0, 1}, 5), BlockIndex({2, 3}, 5),
                                          BlockIndex({4}, 5)};
  // block norms: sqrt(5), 3, 4
  const BlockIndex I = select_partition_max_norm(grad, partition);
  CHECK(I == partition[2]);

  const std::vector<BlockIndex> one{BlockIndex::full(5)};
  CHECK(select_partition_max_norm(grad, one) == BlockIndex::full(5));

  // equal norms: first block in list order wins
  const Vector flat = vec({1, 1, 1, 1});
  const std::vector<BlockIndex> halves{BlockIndex({0, 1}, 4), BlockIndex({2, 3}, 4)};
  CHECK(select_partition_max_norm(flat, halves) == halves[0]);
}

TEST_CASE("theta_bound") {
  CHECK(theta_bound(SelectionRule::max_abs_fill(3), 5) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
  CHECK(theta_bound(SelectionRule::max_abs_fill(5), 5) == 1.0);

  std::vector<BlockIndex> four;
  for (Index k = 0; k < 4; ++k) four.push_back(BlockIndex({k}, 4));
  CHECK(theta_bound(SelectionRule::fixed_partition(four), 4) == doctest::Approx(0.5));
}

TEST_CASE("selection guarantee holds on random gradients") {
  std::mt19937_64 rng(79);
  const Index n = 30;
  std::vector<BlockIndex> partition;
  for (Index k = 0; k < 6; ++k) {
    std::vector<Index> idx;
    for (Index i = 0; i < n; ++i)
      if (i % 6 == k) idx.push_back(i);
    partition.push_back(BlockIndex(idx, n));
  }
  const SelectionRule fill = SelectionRule::max_abs_fill(5);
  const SelectionRule part = SelectionRule::fixed_partition(partition);
  const double theta_fill = theta_bound(fill, n);
  const double theta_part = theta_bound(part, n);

  for (int rep = 0; rep < 1000; ++rep) {
    const Vector grad = ts::random_vector(n, rng);
    const BlockIndex a = select_max_abs_fill(grad, 5, rng);
    CHECK(gather(grad, a).norm() >= theta_fill * grad.norm() * (1.0 - 1e-15));
    const BlockIndex b = select_partition_max_norm(grad, partition);
    CHECK(gather(grad, b).norm() >= theta_part * grad.norm() * (1.0 - 1e-15));
  }
}

TEST_CASE("overlapping block families are allowed and keep the bound") {
  std::mt19937_64 rng(83);
  const Index n = 12;
  const std::vector<BlockIndex> overlapping{BlockIndex({0, 1, 2, 3, 4, 5}, n),
                                            BlockIndex({4, 5, 6, 7, 8}, n),
                                            BlockIndex({8, 9, 10, 11, 0}, n)};
  const SelectionRule rule = SelectionRule::fixed_partition(overlapping);
  const double theta = theta_bound(rule, n);
  for (int rep = 0; rep < 200; ++rep) {
    const Vector grad = ts::random_vector(n, rng);
    const BlockIndex I = select_partition_max_norm(grad, overlapping);
    CHECK(gather(grad, I).norm() >= theta * grad.norm() * (1.0 - 1e-15));
  }
}

TEST_CASE("selection requires a nonzero gradient and full coverage") {
  std::mt19937_64 rng(89);
  CHECK_THROWS_AS(select_max_abs_fill(Vector::Zero(5), 2, rng), Error);
  CHECK_THROWS_AS(select_max_abs_fill(vec({1, 2, 3}), 4, rng), InvalidBlockError);

  const std::vector<BlockIndex> gap{BlockIndex({0, 1}, 4), BlockIndex({2}, 4)};
  CHECK_THROWS_AS(select_partition_max_norm(vec({1, 1, 1, 1}), gap), InvalidBlockError);
  CHECK_THROWS_AS(select_partition_max_norm(Vector::Zero(4), gap), Error);
}
