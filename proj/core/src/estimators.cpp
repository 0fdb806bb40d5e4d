#include "histoband/estimators.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

#include "histoband/quadrature.hpp"

namespace histoband {

std::size_t HistogramFit::empty_cells() const {
  return static_cast<std::size_t>(std::count(empty.begin(), empty.end(),
                                             std::uint8_t{1}));
}

HistogramFit fit(const Grid& grid, const Dataset& data) {
  data.validate();
  if (data.dim != grid.dim()) {
    throw std::invalid_argument("fit: dataset dimension does not match grid");
  }

  const std::size_t cells = grid.cell_count();
  HistogramFit out{grid, data.size(),
                   std::vector<std::int64_t>(cells, 0),
                   std::vector<double>(cells, 0.0),
                   std::vector<double>(cells, 0.0),
                   std::vector<std::uint8_t>(cells, 1)};

  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint64_t c = grid.cell_index_of(data.x(i));
    const double y = data.ys[i];
    out.count[c] += 1;
    out.mean_y[c] += y;       // sums for now
    out.mean_y2[c] += y * y;
  }
  for (std::size_t c = 0; c < cells; ++c) {
    if (out.count[c] > 0) {
      const auto cnt = static_cast<double>(out.count[c]);
      out.mean_y[c] /= cnt;
      out.mean_y2[c] /= cnt;
      out.empty[c] = 0;
    }
  }
  return out;
}

std::vector<double> p_hat(const HistogramFit& fit) {
  std::vector<double> out(fit.count.size());
  const auto n = static_cast<double>(fit.n);
  for (std::size_t c = 0; c < out.size(); ++c) {
    out[c] = static_cast<double>(fit.count[c]) / n;
  }
  return out;
}

double sigma2_global(const HistogramFit& fit, const Dataset& data,
                     double floor) {
  if (data.size() != fit.n || data.dim != fit.grid.dim()) {
    throw std::invalid_argument("sigma2_global: dataset does not match fit");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint64_t c = fit.grid.cell_index_of(data.x(i));
    const double r = data.ys[i] - fit.mean_y[c];
    sum += r * r;
  }
  return std::max(sum / static_cast<double>(fit.n), floor);
}

VarianceModel local_variance(const HistogramFit& fit, double floor) {
  const std::size_t cells = fit.count.size();
  VarianceModel var;
  var.mode = VarianceMode::kLocal;
  var.floor = floor;
  var.local_sigma2.assign(cells, 0.0);
  var.defined.assign(cells, 0);
  var.low_count.assign(cells, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    if (fit.count[c] == 0) continue;
    var.defined[c] = 1;
    var.low_count[c] = fit.count[c] < 2 ? 1 : 0;
    var.local_sigma2[c] =
        std::max(fit.mean_y2[c] - fit.mean_y[c] * fit.mean_y[c], floor);
  }
  return var;
}

VarianceModel global_variance(const HistogramFit& fit, const Dataset& data,
                              double floor) {
  VarianceModel var;
  var.mode = VarianceMode::kHomoscedastic;
  var.floor = floor;
  var.global_sigma2 = sigma2_global(fit, data, floor);
  return var;
}

TauModel tau_plugin(const HistogramFit& fit, const VarianceModel& var) {
  const std::size_t cells = fit.count.size();
  TauModel tau{fit.grid, std::vector<double>(cells, 0.0),
               std::vector<std::uint8_t>(cells, 0)};
  const auto n = static_cast<double>(fit.n);
  for (std::size_t c = 0; c < cells; ++c) {
    if (fit.count[c] == 0) continue;
    const double phat = static_cast<double>(fit.count[c]) / n;
    double s2 = 0.0;
    if (var.mode == VarianceMode::kHomoscedastic) {
      s2 = var.global_sigma2;
    } else {
      if (var.defined.size() != cells) {
        throw std::invalid_argument("tau_plugin: variance model size mismatch");
      }
      if (!var.defined[c]) continue;
      s2 = var.local_sigma2[c];
    }
    if (s2 <= 0.0) continue;
    tau.tau[c] = phat / s2;
    tau.defined[c] = 1;
  }
  return tau;
}

std::vector<double> oracle_cell_probabilities(const Grid& grid,
                                              const DensityFn& f_x) {
  const std::size_t cells = grid.cell_count();
  std::vector<double> out(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto [lo, hi] = grid.cell_box(c);
    const double p = integrate_box(f_x, lo, hi);
    if (!(p > 0.0)) {
      throw std::runtime_error("oracle_cell_probabilities: nonpositive mass");
    }
    out[c] = p;
  }
  return out;
}

TauModel tau_oracle(const Grid& grid, const DensityFn& f_x,
                    const DensityFn& sigma2) {
  const std::size_t cells = grid.cell_count();
  TauModel tau{grid, std::vector<double>(cells, 0.0),
               std::vector<std::uint8_t>(cells, 1)};
  for (std::size_t c = 0; c < cells; ++c) {
    const auto [lo, hi] = grid.cell_box(c);
    const double p = integrate_box(f_x, lo, hi);
    const double s = integrate_box(
        [&](const std::vector<double>& t) { return sigma2(t) * f_x(t); }, lo,
        hi);
    if (!(p > 0.0) || !(s > 0.0)) {
      throw std::runtime_error("tau_oracle: nonpositive cell integral");
    }
    tau.tau[c] = p * p / s;
  }
  return tau;
}

Decomposition decompose(const Grid& grid, const Dataset& data,
                        const std::function<double(const double*)>& m,
                        std::span<const double> eps,
                        std::span<const double> cell_prob) {
  data.validate();
  if (data.dim != grid.dim()) {
    throw std::invalid_argument("decompose: dataset dimension mismatch");
  }
  if (eps.size() != data.size()) {
    throw std::invalid_argument("decompose: eps size mismatch");
  }
  if (cell_prob.size() != grid.cell_count()) {
    throw std::invalid_argument("decompose: oracle cell probabilities missing");
  }

  const std::size_t cells = grid.cell_count();
  Decomposition out{std::vector<double>(cells, 0.0),
                    std::vector<double>(cells, 0.0),
                    std::vector<double>(cells, 0.0),
                    std::vector<std::uint8_t>(cells, 1)};
  std::vector<std::int64_t> count(cells, 0);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint64_t c = grid.cell_index_of(data.x(i));
    count[c] += 1;
    out.mean_m[c] += m(data.x(i));
    out.mean_eps[c] += eps[i];
  }
  const auto n = static_cast<double>(data.size());
  for (std::size_t c = 0; c < cells; ++c) {
    out.tilde_eps[c] = out.mean_eps[c] / (n * cell_prob[c]);
    if (count[c] > 0) {
      const auto cnt = static_cast<double>(count[c]);
      out.mean_m[c] /= cnt;
      out.mean_eps[c] /= cnt;
      out.empty[c] = 0;
    }
  }
  return out;
}

}  // namespace histoband
