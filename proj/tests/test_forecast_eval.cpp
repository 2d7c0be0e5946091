#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "pnarm/forecast_eval.hpp"
#include "pnarm/rng.hpp"

using namespace pnarm;

namespace {

CountSeries column(const std::vector<std::int64_t>& y) {
  Matrix<std::int64_t> m(y.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) m(i, 0) = y[i];
  return CountSeries(m);
}

PredictiveDistribution single_rates(const std::vector<double>& rates) {
  Matrix<double> r(rates.size(), 1);
  for (std::size_t i = 0; i < rates.size(); ++i) r(i, 0) = rates[i];
  return PredictiveDistribution(r, {1.0});
}

PredictiveDistribution random_mixture(Rng& rng, std::size_t nodes) {
  const std::size_t m = 1 + rng.next_u64() % 6;
  Matrix<double> r(nodes, m);
  std::vector<double> w(m);
  double s = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < nodes; ++i) r(i, k) = 20.0 * rng.uniform_open();
    w[k] = rng.uniform_open();
    s += w[k];
  }
  for (auto& x : w) x /= s;
  return PredictiveDistribution(r, w);
}

// Draw from a per-node mixture by picking a component then a Poisson count.
std::int64_t draw_from(const PredictiveDistribution& p, std::size_t node, Rng& rng) {
  const std::size_t k = rng.categorical(p.weights());
  return rng.poisson(p.rates()(node, k));
}

// Exhaustive simplex search over two chains at step 1e-3.
double grid_best_two(const Matrix<double>& density) {
  double best = -std::numeric_limits<double>::infinity();
  for (int g = 0; g <= 1000; ++g) {
    const double w1 = g / 1000.0;
    double obj = 0.0;
    for (std::size_t r = 0; r < density.rows(); ++r) obj += std::log(w1 * density(r, 0) + (1.0 - w1) * density(r, 1));
    best = std::max(best, obj);
  }
  return best;
}

}  // namespace

TEST_CASE("log score examples") {
  const std::size_t t[] = {1};
  {
    const std::vector<PredictiveDistribution> f{single_rates({1.0})};
    const auto r = log_score(f, t, column({0}));
    CHECK(r.cell_scores(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r.mean_log_score == doctest::Approx(1.0).epsilon(1e-15));
  }
  {
    const std::vector<PredictiveDistribution> f{single_rates({std::log(2.0), std::log(4.0)})};
    const auto r = log_score(f, t, column({0, 0}));
    CHECK(r.mean_log_score == doctest::Approx((std::log(2.0) + std::log(4.0)) / 2.0).epsilon(1e-14));
  }
  {
    const std::vector<PredictiveDistribution> f{single_rates({0.0, 2.0})};
    const auto r = log_score(f, t, column({3, 1}));
    CHECK(r.infinite_cells == 1);
    CHECK(std::isinf(r.cell_scores(0, 0)));
    CHECK(r.mean_log_score == doctest::Approx(2.0 - std::log(2.0)).epsilon(1e-14));
  }
}

TEST_CASE("log score averages over every scored cell") {
  Matrix<std::int64_t> y(3, 4, 2);
  CountSeries obs(y);
  Rng rng(1);
  std::vector<PredictiveDistribution> f;
  for (int k = 0; k < 3; ++k) f.push_back(random_mixture(rng, 3));
  const std::size_t times[] = {2, 3, 4};
  const auto r = log_score(f, times, obs);
  CHECK(r.cell_scores.rows() == 3);
  CHECK(r.cell_scores.cols() == 3);
  double s = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t i = 0; i < 3; ++i) s += -std::log(f[k].pmf(i, 2));
  }
  CHECK(r.mean_log_score == doctest::Approx(s / 9.0).epsilon(1e-13));
}

TEST_CASE("cdf difference equals the pmf") {
  Rng rng(2);
  for (int rep = 0; rep < 300; ++rep) {
    const auto p = random_mixture(rng, 1);
    const std::int64_t y = draw_from(p, 0, rng);
    const double direct = -std::log(p.pmf(0, y));
    CHECK(std::abs(cdf_difference_score(p, 0, y) - direct) <= 1e-12 * std::max(1.0, direct));
  }
}

TEST_CASE("raising the pmf at every observation improves the score") {
  Rng rng(3);
  std::vector<std::int64_t> obs(10);
  std::vector<double> far(10), near(10);
  for (std::size_t i = 0; i < 10; ++i) {
    obs[i] = 1 + static_cast<std::int64_t>(rng.next_u64() % 20);
    near[i] = static_cast<double>(obs[i]) * (1.0 + 0.1 * rng.uniform());
    far[i] = near[i] + 3.0;
  }
  const std::size_t t[] = {1};
  const std::vector<PredictiveDistribution> a{single_rates(far)}, b{single_rates(near)};
  CHECK(log_score(b, t, column(obs)).mean_log_score < log_score(a, t, column(obs)).mean_log_score);
}

TEST_CASE("MASE") {
  SUBCASE("worked example") {
    Matrix<std::int64_t> y(1, 4);
    for (std::size_t t = 0; t < 4; ++t) y(0, t) = static_cast<std::int64_t>(t + 1);
    const double f[] = {4.0}, truth[] = {5.0};
    const auto r = mase(f, truth, CountSeries(y));
    CHECK(*r.scaled_errors[0] == doctest::Approx(1.0));
    CHECK(r.mean == doctest::Approx(1.0));
    const double exact[] = {5.0};
    CHECK(mase(exact, truth, CountSeries(y)).mean == 0.0);
  }
  SUBCASE("constant series is excluded") {
    Matrix<std::int64_t> y(2, 3, 4);
    y(1, 1) = 6;
    const double f[] = {4.0, 4.0}, truth[] = {5.0, 7.0};
    const auto r = mase(f, truth, CountSeries(y));
    CHECK_FALSE(r.scaled_errors[0].has_value());
    CHECK(r.undefined_nodes == 1);
    CHECK(r.mean == doctest::Approx(3.0 / 2.0));
  }
  SUBCASE("errors") {
    Matrix<std::int64_t> y(1, 3, 4);
    const double f[] = {4.0}, truth[] = {5.0};
    CHECK_THROWS_AS(mase(f, truth, CountSeries(y)), std::domain_error);
    CHECK_THROWS(mase(f, truth, CountSeries(Matrix<std::int64_t>(1, 2, 1))));
  }
}

TEST_CASE("randomized PIT") {
  Rng rng(4);
  for (int k = 0; k < 100; ++k) {
    const double u = randomized_pit(0.2, 0.7, rng);
    CHECK(u >= 0.2);
    CHECK(u <= 0.7);
  }
  // All mass at 0: the interval is [0, 1].
  const auto point = single_rates({0.0});
  std::vector<double> us;
  for (int k = 0; k < 2000; ++k) us.push_back(randomized_pit(point, 0, 0, rng));
  CHECK(ks_uniform(us).p_value > 0.01);
}

TEST_CASE("PITs of self-simulated data are uniform; a misspecified forecast is rejected") {
  Rng rng(5);
  std::vector<double> good, bad;
  for (int k = 0; k < 2000; ++k) {
    const auto p = random_mixture(rng, 1);
    const std::int64_t y = draw_from(p, 0, rng);
    good.push_back(randomized_pit(p, 0, y, rng));
    Matrix<double> wide = p.rates();
    for (std::size_t c = 0; c < wide.cols(); ++c) wide(0, c) *= 2.0;
    bad.push_back(randomized_pit(PredictiveDistribution(wide, p.weights()), 0, y, rng));
  }
  CHECK(ks_uniform(good).p_value > 0.01);
  CHECK(ks_uniform(bad).p_value < 0.01);
}

TEST_CASE("PIT histogram") {
  std::vector<double> grid;
  for (int k = 0; k < 10; ++k) grid.push_back((k + 0.5) / 10.0);
  CHECK(pit_histogram(grid, 10) == std::vector<std::size_t>(10, 1));
  CHECK(pit_histogram(std::vector<double>{}, 4) == std::vector<std::size_t>(4, 0));
  CHECK(pit_histogram(std::vector<double>{0.05, 0.95}, 2) == std::vector<std::size_t>{1, 1});
  CHECK(pit_histogram(std::vector<double>{0.0, 1.0}, 3) == std::vector<std::size_t>{1, 0, 1});
  CHECK_THROWS(pit_histogram(std::vector<double>{1.5}, 3));
}

TEST_CASE("KS statistic and p-value") {
  // Sample u_k = s (k+1)/n has D = 1 - s exactly.
  auto squeezed = [](std::size_t n, double d) {
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = (1.0 - d) * static_cast<double>(k + 1) / static_cast<double>(n);
    return u;
  };
  const std::size_t n = 10000;
  const double root = std::sqrt(static_cast<double>(n));
  const double factor = root + 0.12 + 0.11 / root;
  // Tabulated Kolmogorov quantiles: P(K > 1.3581) = 0.05, P(K > 1.6276) = 0.01.
  const auto at5 = ks_uniform(squeezed(n, 1.3581 / factor));
  CHECK(at5.statistic == doctest::Approx(1.3581 / factor).epsilon(1e-9));
  CHECK(at5.p_value == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(ks_uniform(squeezed(n, 1.6276 / factor)).p_value == doctest::Approx(0.01).epsilon(2e-3));
  CHECK(ks_uniform(std::vector<double>(100, 0.5)).p_value < 1e-10);
  CHECK(ks_uniform(squeezed(n, 0.0)).p_value == doctest::Approx(1.0));
}

TEST_CASE("stacking weights") {
  SUBCASE("one chain") {
    Matrix<double> d(3, 1, 0.2);
    const auto r = stacking_weights(d);
    CHECK(r.weights == std::vector<double>{1.0});
  }
  SUBCASE("identical chains stay uniform") {
    Matrix<double> d(4, 2);
    for (std::size_t r = 0; r < 4; ++r) d(r, 0) = d(r, 1) = 0.1 * (r + 1);
    const auto r = stacking_weights(d);
    CHECK(r.weights[0] == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("dominant chain takes all weight") {
    Rng rng(6);
    Matrix<double> d(12, 2);
    for (std::size_t r = 0; r < 12; ++r) {
      d(r, 0) = 0.05 + 0.3 * rng.uniform();
      d(r, 1) = d(r, 0) * (0.1 + 0.5 * rng.uniform());
    }
    const auto r = stacking_weights(d);
    CHECK(std::abs(r.weights[0] - 1.0) <= 1e-6);
    CHECK(std::abs(r.weights[1]) <= 1e-6);
    CHECK(std::abs(r.objective - grid_best_two(d)) <= 1e-6);
  }
  SUBCASE("interior optimum matches the grid and beats vertices") {
    Rng rng(7);
    Matrix<double> d(30, 2);
    for (std::size_t r = 0; r < 30; ++r) {
      d(r, 0) = rng.uniform_open();
      d(r, 1) = rng.uniform_open();
    }
    const auto r = stacking_weights(d);
    CHECK(r.objective >= grid_best_two(d) - 1e-9);
    const double v0[] = {1.0, 0.0}, v1[] = {0.0, 1.0}, mid[] = {0.5, 0.5};
    CHECK(r.objective >= stacking_objective(d, v0));
    CHECK(r.objective >= stacking_objective(d, v1));
    CHECK(r.objective >= stacking_objective(d, mid));
    CHECK(r.weights[0] + r.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("three chains") {
    Rng rng(8);
    Matrix<double> d(25, 3);
    for (std::size_t r = 0; r < 25; ++r) {
      for (std::size_t c = 0; c < 3; ++c) d(r, c) = rng.uniform_open();
    }
    const auto r = stacking_weights(d);
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a <= 200; ++a) {
      for (int b = 0; a + b <= 200; ++b) {
        const double w[] = {a / 200.0, b / 200.0, (200 - a - b) / 200.0};
        best = std::max(best, stacking_objective(d, w));
      }
    }
    CHECK(r.objective >= best - 1e-9);
  }
  SUBCASE("a cell with no mass is an error") {
    Matrix<double> d(2, 2, 0.5);
    d(1, 0) = d(1, 1) = 0.0;
    CHECK_THROWS_AS(stacking_weights(d), std::domain_error);
  }
}

TEST_CASE("KS p-value is continuous across the series switch") {
  // Both series forms must agree near the switch point.
  const std::size_t n = 400;
  const double factor = std::sqrt(400.0) + 0.12 + 0.11 / std::sqrt(400.0);
  double prev = 1.0;
  for (double lambda = 0.3; lambda < 2.5; lambda += 0.01) {
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) u[k] = (1.0 - lambda / factor) * static_cast<double>(k + 1) / n;
    const double p = ks_uniform(u).p_value;
    CHECK(p <= prev + 1e-12);
    CHECK(p >= prev - 0.05);
    prev = p;
  }
}
