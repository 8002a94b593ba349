#include <doctest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "opscore/common/error.hpp"
#include "opscore/common/parallel.hpp"
#include "opscore/common/rng.hpp"
#include "opscore/common/stats.hpp"

using namespace opscore;

namespace {

// Pairwise count over every (positive, negative) pair.
double auc_pairs(const std::vector<double>& pos, const std::vector<double>& neg) {
  double wins = 0.0;
  for (double p : pos)
    for (double n : neg) wins += p > n ? 1.0 : (p == n ? 0.5 : 0.0);
  return wins / static_cast<double>(pos.size() * neg.size());
}

// Closed form for distinct values: 1 - 6 sum d^2 / (n (n^2 - 1)).
double spearman_distinct(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    int rx = 1, ry = 1;
    for (std::size_t j = 0; j < n; ++j) {
      rx += x[j] < x[i];
      ry += y[j] < y[i];
    }
    d2 += (rx - ry) * (rx - ry);
  }
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

}  // namespace

TEST_CASE("average ranks share ties") {
  const std::vector<double> v{3.0, 1.0, 3.0, 2.0};
  CHECK(average_ranks(v) == std::vector<double>{3.5, 1.0, 3.5, 2.0});
}

TEST_CASE("spearman against the distinct-value formula") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x, y;
    for (int i = 0; i < 17; ++i) {
      x.push_back(uniform(rng, -1.0, 1.0));
      y.push_back(x.back() + uniform(rng, -1.0, 1.0));
    }
    CHECK(spearman(x, y) == doctest::Approx(spearman_distinct(x, y)).epsilon(1e-12));
  }
  const std::vector<double> a{1, 2, 3, 4}, b{10, 20, 30, 45}, c{4, 3, 2, 1}, k{5, 5, 5, 5};
  CHECK(spearman(a, b) == doctest::Approx(1.0));
  CHECK(spearman(a, c) == doctest::Approx(-1.0));
  CHECK(spearman(a, k) == 0.0);
}

TEST_CASE("roc auc against pairwise counting") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> pos, neg;
    // Coarse values so ties occur.
    for (int i = 0; i < 13; ++i) pos.push_back(std::round(uniform(rng, 0.0, 6.0)));
    for (int i = 0; i < 21; ++i) neg.push_back(std::round(uniform(rng, -2.0, 4.0)));
    CHECK(roc_auc(pos, neg) == doctest::Approx(auc_pairs(pos, neg)).epsilon(1e-12));
  }
  CHECK(roc_auc(std::vector<double>{2, 3}, std::vector<double>{0, 1}) == 1.0);
  CHECK(roc_auc(std::vector<double>{1}, std::vector<double>{1}) == 0.5);
}

TEST_CASE("mean and median") {
  CHECK(mean(std::vector<double>{1, 2, 6}) == doctest::Approx(3.0));
  CHECK(median({5, 1, 3}) == 3.0);
  CHECK(median({4, 1, 3, 2}) == 2.5);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  for (bool serial : {false, true}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; }, serial);
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 7) fail(ErrorCode::IoError, "boom"); }, false),
                  Error);
}

TEST_CASE("derived seeds are stable and distinct") {
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}
