#include <cmath>
#include <limits>

#include "doctest.h"
#include "pnarm/posterior.hpp"
#include "pnarm/rng.hpp"
#include "test_util.hpp"

using namespace pnarm;

namespace {

PosteriorDraw draw_of(std::vector<int> labels, std::vector<ClusterParams> thetas = {}) {
  PosteriorDraw d;
  d.partition = PartitionState::from_labels(labels);
  d.thetas = thetas;
  if (d.thetas.empty()) d.thetas.assign(d.partition.clusters(), ClusterParams{1, 1, 1});
  return d;
}

// Loss recomputed pair by pair.
double loss_oracle(const std::vector<int>& z, const Matrix<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (i == j) continue;
      const double d = (z[i] == z[j] ? 1.0 : 0.0) - c(i, j);
      s += d * d;
    }
  }
  return s;
}

double poisson_pmf(std::int64_t y, double rate) {
  if (rate == 0.0) return y == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(y) * std::log(rate) - rate - std::lgamma(static_cast<double>(y) + 1.0));
}

}  // namespace

TEST_CASE("co-clustering matrix examples") {
  const std::vector<PosteriorDraw> one{draw_of({0, 1, 0})};
  const auto c1 = cocluster_matrix(one);
  CHECK(c1(0, 2) == 1.0);
  CHECK(c1(0, 1) == 0.0);
  CHECK(c1(1, 1) == 1.0);

  const std::vector<PosteriorDraw> two{draw_of({0, 0, 1}), draw_of({0, 1, 1})};
  const auto c = cocluster_matrix(two);
  CHECK(c(0, 1) == 0.5);
  CHECK(c(1, 2) == 0.5);
  CHECK(c(0, 2) == 0.0);
  CHECK(c(2, 0) == 0.0);
}

TEST_CASE("co-clustering matrix is symmetric, unit-diagonal and label-invariant") {
  Rng rng(1);
  std::vector<PosteriorDraw> draws, relabelled;
  for (int m = 0; m < 50; ++m) {
    std::vector<int> z(9), perm(9);
    for (auto& l : z) l = static_cast<int>(rng.next_u64() % 4);
    for (int& l : perm) l = 0;
    std::vector<int> swapped(9);
    for (std::size_t i = 0; i < 9; ++i) swapped[i] = 3 - z[i];
    draws.push_back(draw_of(z));
    relabelled.push_back(draw_of(swapped));
  }
  const auto c = cocluster_matrix(draws);
  CHECK(c == cocluster_matrix(relabelled));
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(c(i, i) == 1.0);
    for (std::size_t j = 0; j < 9; ++j) {
      CHECK(c(i, j) == c(j, i));
      CHECK(c(i, j) >= 0.0);
      CHECK(c(i, j) <= 1.0);
    }
  }
}

TEST_CASE("least-squares partition examples") {
  SUBCASE("identical draws") {
    const std::vector<PosteriorDraw> d{draw_of({0, 1, 1}), draw_of({0, 1, 1})};
    const auto ls = least_squares_partition(d, cocluster_matrix(d));
    CHECK(ls.index == 0);
    CHECK(ls.loss == 0.0);
  }
  SUBCASE("two-draw tie") {
    const std::vector<PosteriorDraw> d{draw_of({0, 0, 1}), draw_of({0, 1, 1})};
    const auto c = cocluster_matrix(d);
    // Each draw misses two ordered pairs by 0.5 in each direction: 4 * 0.25 = 1.
    CHECK(least_squares_loss(d[0].partition, c) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(least_squares_loss(d[1].partition, c) == doctest::Approx(1.0).epsilon(1e-15));
    const auto ls = least_squares_partition(d, c);
    CHECK(ls.index == 0);
    CHECK(ls.loss == doctest::Approx(1.0));
  }
  SUBCASE("majority wins") {
    const std::vector<PosteriorDraw> d{draw_of({0, 1, 1}), draw_of({0, 0, 1}), draw_of({0, 0, 1})};
    const auto ls = least_squares_partition(d, cocluster_matrix(d));
    CHECK(ls.index == 1);
    CHECK(ls.partition == d[1].partition);
  }
}

TEST_CASE("least-squares partition matches an exhaustive scan") {
  Rng rng(2);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<PosteriorDraw> d;
    const std::size_t n = 2 + rng.next_u64() % 15;
    for (int m = 0; m < 40; ++m) {
      std::vector<int> z(n);
      for (auto& l : z) l = static_cast<int>(rng.next_u64() % 3);
      d.push_back(draw_of(z));
    }
    const auto c = cocluster_matrix(d);
    const auto ls = least_squares_partition(d, c);
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t m = 0; m < d.size(); ++m) {
      const double l = loss_oracle(d[m].partition.labels(), c);
      CHECK(least_squares_loss(d[m].partition, c) == doctest::Approx(l).epsilon(1e-12));
      if (l < best - 1e-12) {
        best = l;
        arg = m;
      }
    }
    CHECK(ls.index == arg);
    CHECK(ls.loss == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("predictive distribution examples") {
  SUBCASE("single component") {
    PredictiveDistribution p(Matrix<double>(1, 1, 2.5), {1.0});
    for (std::int64_t y = 0; y < 10; ++y) CHECK(p.pmf(0, y) == doctest::Approx(poisson_pmf(y, 2.5)).epsilon(1e-14));
    CHECK(p.mean(0) == 2.5);
  }
  SUBCASE("equal rates collapse") {
    PredictiveDistribution two(Matrix<double>(1, 2, 3.0), {0.5, 0.5});
    PredictiveDistribution one(Matrix<double>(1, 1, 3.0), {1.0});
    for (std::int64_t y = 0; y < 15; ++y) CHECK(two.pmf(0, y) == doctest::Approx(one.pmf(0, y)).epsilon(1e-14));
  }
  SUBCASE("rates 1 and 3") {
    Matrix<double> r(1, 2);
    r(0, 0) = 1.0;
    r(0, 1) = 3.0;
    PredictiveDistribution p(r, {0.5, 0.5});
    CHECK(p.pmf(0, 0) == doctest::Approx((std::exp(-1.0) + std::exp(-3.0)) / 2.0).epsilon(1e-15));
    CHECK(p.mean(0) == doctest::Approx(2.0));
  }
  SUBCASE("weighted mean") {
    Matrix<double> r(1, 2);
    r(0, 1) = 4.0;
    PredictiveDistribution p(r, {0.25, 0.75});
    CHECK(p.mean(0) == doctest::Approx(3.0));
    CHECK(p.pmf(0, 0) == doctest::Approx(0.25 + 0.75 * std::exp(-4.0)));
  }
  SUBCASE("bad weights") {
    CHECK_THROWS(PredictiveDistribution(Matrix<double>(1, 2, 1.0), {0.5, 0.6}));
    CHECK_THROWS(PredictiveDistribution(Matrix<double>(1, 2, 1.0), {1.0}));
    CHECK_THROWS(PredictiveDistribution(Matrix<double>(1, 1, -1.0), {1.0}));
  }
}

TEST_CASE("predictive cdf") {
  PredictiveDistribution single(Matrix<double>(1, 1, 1.0), {1.0});
  CHECK(single.cdf(0, -1) == 0.0);
  CHECK(single.cdf(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));

  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t m = 1 + rng.next_u64() % 8;
    Matrix<double> r(1, m);
    std::vector<double> w(m);
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      r(0, k) = rng.uniform() * 100.0;
      w[k] = rng.uniform() + 0.01;
      s += w[k];
    }
    for (auto& x : w) x /= s;
    PredictiveDistribution p(r, w);
    const double top = p.max_rate(0);
    const auto limit = static_cast<std::int64_t>(top + 20.0 * std::sqrt(top) + 50.0);
    double prev = 0.0, running = 0.0;
    for (std::int64_t y = 0; y <= limit; ++y) {
      const double c = p.cdf(0, y);
      CHECK(c >= prev);
      running += p.pmf(0, y);
      CHECK(std::abs(c - running) <= 1e-12);
      prev = c;
    }
    CHECK(std::abs(prev - 1.0) <= 1e-9);
    CHECK(std::abs(running - 1.0) <= 1e-9);
    const auto q = p.quantile(0, 0.5);
    CHECK(p.cdf(0, q) >= 0.5);
    CHECK(p.cdf(0, q - 1) < 0.5);
  }
}

TEST_CASE("predictive distribution from draws") {
  Network net(2);
  net.add_edge(0, 1);
  Matrix<std::int64_t> y(2, 3);
  y(0, 0) = 1; y(0, 1) = 2; y(0, 2) = 4;
  y(1, 0) = 3; y(1, 1) = 5; y(1, 2) = 6;
  CountSeries counts(y);
  const auto preds = build_predictors(counts, net, PredictorMode::raw);

  const auto at4 = lag_inputs_at(counts, preds, net, 4);
  CHECK(at4.x[0] == 6.0);
  CHECK(at4.y_lag[0] == 4.0);
  CHECK(at4.v[1] == 1.0);
  const auto at3 = lag_inputs_at(counts, preds, net, 3);
  CHECK(at3.x[1] == 2.0);
  CHECK(at3.y_lag[1] == 5.0);
  CHECK_THROWS(lag_inputs_at(counts, preds, net, 1));
  CHECK_THROWS(lag_inputs_at(counts, preds, net, 5));

  const std::vector<PosteriorDraw> one{draw_of({0, 1}, {ClusterParams{1, 0.5, 0.25}, ClusterParams{2, 0, 1}})};
  const auto p = predictive_distribution(one, at4);
  CHECK(p.components() == 1);
  CHECK(p.rates()(0, 0) == doctest::Approx(1 + 0.5 * 6 + 0.25 * 4));
  CHECK(p.rates()(1, 0) == doctest::Approx(2 + 0 + 6));
  CHECK(p.mean(1) == doctest::Approx(8.0));

  std::vector<PosteriorDraw> two = one;
  two.push_back(draw_of({0, 0}, {ClusterParams{0, 0, 1}}));
  const double wts[] = {0.25, 0.75};
  const auto q = predictive_distribution(two, at4, wts);
  CHECK(q.weights() == std::vector<double>{0.25, 0.75});
  CHECK(q.mean(0) == doctest::Approx(0.25 * 5.0 + 0.75 * 4.0));
}

TEST_CASE("chain weights expand to per-draw weights") {
  std::vector<PosteriorSamples> chains(2);
  chains[0].draws.resize(2, draw_of({0}));
  chains[1].draws.resize(4, draw_of({0}));
  const double cw[] = {0.6, 0.4};
  const auto w = expand_chain_weights(chains, cw);
  REQUIRE(w.size() == 6);
  CHECK(w[0] == doctest::Approx(0.3));
  CHECK(w[5] == doctest::Approx(0.1));
  CHECK(pool_draws(chains).size() == 6);
}

TEST_CASE("poisson cdf") {
  CHECK(poisson_cdf(-1, 2.0) == 0.0);
  CHECK(poisson_cdf(0, 0.0) == 1.0);
  CHECK(poisson_cdf(3, 0.0) == 1.0);
  double s = 0.0;
  for (std::int64_t y = 0; y <= 30; ++y) {
    s += poisson_pmf(y, 7.3);
    CHECK(poisson_cdf(y, 7.3) == doctest::Approx(s).epsilon(1e-13));
    CHECK(poisson_sf(y, 7.3) == doctest::Approx(1.0 - s).epsilon(1e-11));
  }
  CHECK(poisson_sf(-1, 2.0) == 1.0);
  CHECK(poisson_sf(0, 0.0) == 0.0);
  // Deep upper tail keeps relative accuracy: P(Y > 40) for rate 2.
  double tail = 0.0;
  for (std::int64_t y = 80; y > 40; --y) tail += poisson_pmf(y, 2.0);
  CHECK(poisson_sf(40, 2.0) == doctest::Approx(tail).epsilon(1e-12));
}
