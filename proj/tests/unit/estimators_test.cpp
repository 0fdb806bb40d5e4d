#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "histoband/estimators.hpp"
#include "histoband/grid.hpp"
#include "histoband/rng.hpp"
#include "support/oracles.hpp"

using namespace histoband;

namespace {

Dataset three_points() {
  Dataset d;
  d.dim = 1;
  d.xs = {0.1, 0.2, 0.7};
  d.ys = {1.0, 3.0, 5.0};
  return d;
}

}  // namespace

TEST_CASE("fit worked example") {
  const Grid grid(1, 2);
  const HistogramFit f = fit(grid, three_points());
  CHECK(f.n == 3);
  CHECK(f.count == std::vector<std::int64_t>{2, 1});
  CHECK(f.mean_y[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(f.mean_y[1] == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(f.mean_y2[0] == doctest::Approx(5.0).epsilon(1e-15));   // (1+9)/2
  CHECK(f.mean_y2[1] == doctest::Approx(25.0).epsilon(1e-15));
  CHECK(f.empty == std::vector<std::uint8_t>{0, 0});
  CHECK(f.empty_cells() == 0);
}

TEST_CASE("empty cells carry zero and the flag") {
  const Grid grid(1, 4);
  Dataset d;
  d.dim = 1;
  d.xs = {0.05, 0.1, 0.2};
  d.ys = {6.0, 6.0, 6.0};
  const HistogramFit f = fit(grid, d);
  CHECK(f.count == std::vector<std::int64_t>{3, 0, 0, 0});
  CHECK(f.mean_y == std::vector<double>{6.0, 0.0, 0.0, 0.0});
  CHECK(f.empty == std::vector<std::uint8_t>{0, 1, 1, 1});
  CHECK(f.empty_cells() == 3);

  Dataset single;
  single.dim = 1;
  single.xs = {0.9};
  single.ys = {7.0};
  const HistogramFit g = fit(grid, single);
  CHECK(g.mean_y == std::vector<double>{0.0, 0.0, 0.0, 7.0});
  CHECK(g.empty_cells() == 3);
}

TEST_CASE("fit rejects dimension mismatch and empty data") {
  const Grid grid(2, 2);
  CHECK_THROWS_AS(fit(grid, three_points()), std::invalid_argument);
  Dataset empty;
  empty.dim = 2;
  CHECK_THROWS_AS(fit(grid, empty), std::invalid_argument);
}

TEST_CASE("second moment dominates squared mean on nonempty cells") {
  std::mt19937 gen(3);
  const Grid grid(2, 3);
  const Dataset d = histoband::testing::random_dataset(gen, 2, 200);
  const HistogramFit f = fit(grid, d);
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    if (f.is_empty(c)) continue;
    CHECK(f.mean_y2[c] >= f.mean_y[c] * f.mean_y[c] - 1e-12);
  }
}

TEST_CASE("p_hat worked examples and normalization") {
  const Grid grid(1, 2);
  const HistogramFit f = fit(grid, three_points());
  const auto freqs = p_hat(f);
  CHECK(freqs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(freqs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  Dataset one_cell;
  one_cell.dim = 1;
  one_cell.xs = {0.6, 0.7, 0.55};
  one_cell.ys = {1.0, 2.0, 3.0};
  const auto ind = p_hat(fit(grid, one_cell));
  CHECK(ind == std::vector<double>{0.0, 1.0});

  std::mt19937 gen(5);
  const Dataset big = histoband::testing::random_dataset(gen, 2, 1000);
  const auto probs = p_hat(fit(Grid(2, 4), big));
  CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("p_hat concentrates near the true mass on a seeded draw") {
  // Uniform X, two cells, n = 1e5: binomial se ~ 0.0016, so 0.01 is ~6 se.
  const Grid grid(1, 2);
  PhiloxStream rng(2024, 0, rng_stage::kCovariates);
  Dataset d;
  d.dim = 1;
  const std::size_t n = 100000;
  for (std::size_t i = 0; i < n; ++i) {
    d.xs.push_back(rng.uniform01());
    d.ys.push_back(0.0);
  }
  const auto probs = p_hat(fit(grid, d));
  CHECK(std::abs(probs[0] - 0.5) < 0.01);
  CHECK(std::abs(probs[1] - 0.5) < 0.01);
}

TEST_CASE("one point per cell gives the exact equal share") {
  const Grid grid(2, 3);
  Dataset d;
  d.dim = 2;
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    const auto [lo, hi] = grid.cell_box(c);
    d.xs.push_back(0.5 * (lo[0] + hi[0]));
    d.xs.push_back(0.5 * (lo[1] + hi[1]));
    d.ys.push_back(1.0);
  }
  const auto probs = p_hat(fit(grid, d));
  for (const double p : probs) CHECK(p == 1.0 / 9.0);
}

TEST_CASE("global variance worked example and floor") {
  const Grid grid(1, 2);
  const Dataset d = three_points();
  const HistogramFit f = fit(grid, d);
  // Residuals (-1, 1, 0) against cell means (2, 5).
  CHECK(sigma2_global(f, d) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  Dataset constant;
  constant.dim = 1;
  constant.xs = {0.1, 0.6, 0.9};
  constant.ys = {4.0, 4.0, 4.0};
  const HistogramFit g = fit(grid, constant);
  CHECK(sigma2_global(g, constant) == kDefaultVarianceFloor);
  CHECK(sigma2_global(g, constant, 1e-4) == 1e-4);

  // Y exactly piecewise-constant on the grid: residuals vanish.
  Dataset exact;
  exact.dim = 1;
  exact.xs = {0.1, 0.3, 0.6, 0.8};
  exact.ys = {-2.0, -2.0, 3.0, 3.0};
  CHECK(sigma2_global(fit(grid, exact), exact) == kDefaultVarianceFloor);
}

TEST_CASE("local variance worked examples") {
  const Grid grid(1, 2);
  const HistogramFit f = fit(grid, three_points());
  const VarianceModel v = local_variance(f);
  CHECK(v.mode == VarianceMode::kLocal);
  // Cell {1,3}: mean_y2 5, mean^2 4 -> 1; also mean of (Y-mhat)^2 = 1.
  CHECK(v.local_sigma2[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(v.defined[0] == 1);
  CHECK(v.low_count[0] == 0);
  // Single observation: zero variance clamps to the floor, low-count set.
  CHECK(v.local_sigma2[1] == kDefaultVarianceFloor);
  CHECK(v.low_count[1] == 1);
}

TEST_CASE("local variance is undefined on empty cells") {
  const Grid grid(1, 4);
  Dataset d;
  d.dim = 1;
  d.xs = {0.1, 0.15};
  d.ys = {1.0, 2.0};
  const VarianceModel v = local_variance(fit(grid, d));
  CHECK(v.defined == std::vector<std::uint8_t>{1, 0, 0, 0});
}

TEST_CASE("two algebraic forms of the local variance agree") {
  std::mt19937 gen(17);
  const Grid grid(1, 4);
  const Dataset d = histoband::testing::random_dataset(gen, 1, 300);
  const HistogramFit f = fit(grid, d);
  const VarianceModel v = local_variance(f);
  // Recompute as the cell-mean of squared residuals.
  std::vector<double> ss(grid.cell_count(), 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto c = grid.cell_index_of(d.x(i));
    const double r = d.ys[i] - f.mean_y[c];
    ss[c] += r * r;
  }
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    if (f.is_empty(c)) continue;
    const double direct = ss[c] / static_cast<double>(f.count[c]);
    CHECK(std::abs(direct - v.local_sigma2[c]) <= 1e-10);
  }
}

TEST_CASE("tau plug-in") {
  const Grid grid(1, 2);
  const Dataset d = three_points();
  const HistogramFit f = fit(grid, d);

  VarianceModel unit;
  unit.mode = VarianceMode::kLocal;
  unit.local_sigma2 = {1.0, 1.0};
  unit.defined = {1, 1};
  unit.low_count = {0, 0};
  const TauModel t = tau_plugin(f, unit);
  CHECK(t.tau[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(t.tau[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t.defined == std::vector<std::uint8_t>{1, 1});

  const TauModel g = tau_plugin(f, global_variance(f, d));
  const double s2 = 2.0 / 3.0;
  CHECK(g.tau[0] == doctest::Approx((2.0 / 3.0) / s2).epsilon(1e-14));
  CHECK(g.tau[1] == doctest::Approx((1.0 / 3.0) / s2).epsilon(1e-14));
}

TEST_CASE("tau plug-in flags empty cells undefined") {
  const Grid grid(1, 4);
  Dataset d;
  d.dim = 1;
  d.xs = {0.1, 0.15, 0.3};
  d.ys = {1.0, 5.0, 2.0};
  const HistogramFit f = fit(grid, d);
  const TauModel t = tau_plugin(f, local_variance(f));
  CHECK(t.defined == std::vector<std::uint8_t>{1, 1, 0, 0});
  CHECK(t.tau[2] == 0.0);
}

TEST_CASE("oracle tau for constant density and variance") {
  const Grid grid(1, 10);
  const TauModel t = tau_oracle(
      grid, [](const std::vector<double>&) { return 1.0; },
      [](const std::vector<double>&) { return 4.0; });
  for (std::uint64_t c = 0; c < 10; ++c) {
    CHECK(t.tau[c] == doctest::Approx(0.025).epsilon(1e-13));
    CHECK(t.defined[c] == 1);
  }
}

TEST_CASE("oracle tau with linear variance function") {
  // Uniform density, sigma^2(x) = 1 + x, cell [0, 1/2]:
  // p = 1/2, s = 5/8, tau = (1/4)/(5/8) = 0.4.
  const Grid grid(1, 2);
  const TauModel t = tau_oracle(
      grid, [](const std::vector<double>&) { return 1.0; },
      [](const std::vector<double>& x) { return 1.0 + x[0]; });
  CHECK(t.tau[0] == doctest::Approx(0.4).epsilon(1e-13));
  // Cell [1/2, 1]: s = int (1+t) = 7/8, tau = (1/4)/(7/8) = 2/7.
  CHECK(t.tau[1] == doctest::Approx(2.0 / 7.0).epsilon(1e-13));
}

TEST_CASE("oracle cell masses respect density bounds and sum to one") {
  // Density 1/2 + t per coordinate: bounds [1/2, 3/2] times delta.
  const Grid grid(1, 8);
  const auto probs = oracle_cell_probabilities(
      grid, [](const std::vector<double>& x) { return 0.5 + x[0]; });
  const double delta = grid.mesh();
  for (const double p : probs) {
    CHECK(p >= 0.5 * delta - 1e-13);
    CHECK(p <= 1.5 * delta + 1e-13);
  }
  CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("oracle integrals reject nonpositive densities") {
  const Grid grid(1, 2);
  CHECK_THROWS_AS(
      oracle_cell_probabilities(grid,
                                [](const std::vector<double>&) { return 0.0; }),
      std::runtime_error);
  CHECK_THROWS_AS(tau_oracle(
                      grid, [](const std::vector<double>&) { return 1.0; },
                      [](const std::vector<double>&) { return -1.0; }),
                  std::runtime_error);
}

TEST_CASE("decomposition identities") {
  std::mt19937 gen(23);
  const Grid grid(1, 4);
  const auto m = [](const double* x) { return 2.0 * x[0] - 1.0; };

  Dataset d;
  d.dim = 1;
  std::vector<double> eps;
  std::uniform_real_distribution<double> ux(0.0, 1.0);
  std::normal_distribution<double> ue(0.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const double x = ux(gen);
    const double e = ue(gen);
    d.xs.push_back(x);
    eps.push_back(e);
    d.ys.push_back(m(&x) + e);
  }
  const std::vector<double> probs(4, 0.25);

  const HistogramFit f = fit(grid, d);
  const Decomposition dec = decompose(grid, d, m, eps, probs);
  for (std::uint64_t c = 0; c < 4; ++c) {
    REQUIRE(dec.empty[c] == 0);
    // Regression part plus noise part reassembles the fit.
    CHECK(std::abs(dec.mean_m[c] + dec.mean_eps[c] - f.mean_y[c]) <= 1e-12);
    // The deterministic-denominator variant: (count/(n p)) * mean_eps.
    const double ratio = static_cast<double>(f.count[c]) /
                         (static_cast<double>(f.n) * probs[c]);
    CHECK(dec.tilde_eps[c] ==
          doctest::Approx(ratio * dec.mean_eps[c]).epsilon(1e-12));
  }
}

TEST_CASE("decomposition degenerate directions") {
  const Grid grid(1, 2);
  const Dataset d = three_points();
  const std::vector<double> zero_eps(3, 0.0);
  const std::vector<double> probs(2, 0.5);

  const auto m = [](const double* x) { return x[0]; };
  const Decomposition no_noise = decompose(grid, d, m, zero_eps, probs);
  CHECK(no_noise.mean_eps == std::vector<double>{0.0, 0.0});
  CHECK(no_noise.tilde_eps == std::vector<double>{0.0, 0.0});

  // m == 0: the fit is pure noise.
  const std::vector<double> eps = d.ys;
  const Decomposition pure_noise =
      decompose(grid, d, [](const double*) { return 0.0; }, eps, probs);
  const HistogramFit f = fit(grid, d);
  CHECK(pure_noise.mean_eps[0] == doctest::Approx(f.mean_y[0]).epsilon(1e-15));
  CHECK(pure_noise.mean_eps[1] == doctest::Approx(f.mean_y[1]).epsilon(1e-15));
}

TEST_CASE("decomposition validates its oracle inputs") {
  const Grid grid(1, 2);
  const Dataset d = three_points();
  const auto m = [](const double*) { return 0.0; };
  CHECK_THROWS_AS(decompose(grid, d, m, std::vector<double>(2, 0.0),
                            std::vector<double>(2, 0.5)),
                  std::invalid_argument);
  CHECK_THROWS_AS(decompose(grid, d, m, std::vector<double>(3, 0.0),
                            std::vector<double>(1, 1.0)),
                  std::invalid_argument);
}

TEST_CASE("fit is permutation invariant") {
  // Dyadic responses make the accumulation exact, so invariance is bitwise.
  const Grid grid(1, 4);
  Dataset d;
  d.dim = 1;
  d.xs = {0.9, 0.1, 0.4, 0.15, 0.55, 0.3};
  d.ys = {1.5, -2.25, 3.0, 0.5, -1.0, 7.25};
  const HistogramFit a = fit(grid, d);

  Dataset shuffled = d;
  std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.xs[i] = d.xs[order[i]];
    shuffled.ys[i] = d.ys[order[i]];
  }
  const HistogramFit b = fit(grid, shuffled);
  CHECK(a.count == b.count);
  CHECK(a.mean_y == b.mean_y);
  CHECK(a.mean_y2 == b.mean_y2);
}

TEST_CASE("fit matches the naive double-loop oracle") {
  std::mt19937 gen(31);
  for (int trial = 0; trial < 25; ++trial) {
    const int dim = 1 + trial % 3;
    const std::uint64_t inv = 2 + trial % 3;
    const Grid grid(dim, inv);
    const Dataset d =
        histoband::testing::random_dataset(gen, dim, 5 + trial % 16);
    const HistogramFit a = fit(grid, d);
    const HistogramFit b = histoband::testing::naive_fit(grid, d);
    CHECK(a.count == b.count);
    CHECK(a.empty == b.empty);
    for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
      CHECK(a.mean_y[c] == doctest::Approx(b.mean_y[c]).epsilon(1e-13));
      CHECK(a.mean_y2[c] == doctest::Approx(b.mean_y2[c]).epsilon(1e-13));
    }
  }
}

TEST_CASE("regression part of the fit stays within the smoothness budget") {
  // With every cell populated, the cell average of an alpha-smooth m cannot
  // drift from m(x) by more than its modulus over one cell diameter.
  const Grid grid(1, 8);
  const double alpha = 1.0, c_h = 2.0;
  const auto m = [&](const double* x) {
    return c_h * std::abs(x[0] - 0.5);  // Lipschitz with constant c_h
  };

  Dataset d;
  d.dim = 1;
  std::vector<double> eps;
  std::mt19937 gen(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    const auto [lo, hi] = grid.cell_box(c);
    for (int k = 0; k < 6; ++k) {
      const double x = lo[0] + (hi[0] - lo[0]) * u(gen);
      d.xs.push_back(x);
      d.ys.push_back(m(&x));
      eps.push_back(0.0);
    }
  }
  const std::vector<double> probs(grid.cell_count(), grid.mesh());
  const Decomposition dec = decompose(grid, d, m, eps, probs);

  const double bound =
      c_h * std::pow(std::sqrt(1.0) * grid.mesh(), alpha) + 1e-10;
  // Probe a 16-point subgrid of every cell.
  double worst = 0.0;
  for (std::uint64_t c = 0; c < grid.cell_count(); ++c) {
    REQUIRE(dec.empty[c] == 0);
    const auto [lo, hi] = grid.cell_box(c);
    for (int k = 0; k < 16; ++k) {
      const double x = lo[0] + (hi[0] - lo[0]) * (2.0 * k + 1.0) / 32.0;
      worst = std::max(worst, std::abs(dec.mean_m[c] - m(&x)));
    }
  }
  CHECK(worst <= bound);
}
