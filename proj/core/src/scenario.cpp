#include "histoband/scenario.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace histoband {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double hash_to_symmetric_unit(std::uint64_t v) {
  const double u = static_cast<double>(splitmix64(v) >> 11) * 0x1.0p-53;
  return 2.0 * u - 1.0;
}

/// Exponent used by the mesh rule; the piecewise family has no smoothness
/// to speak of, so it borrows the Lipschitz exponent.
double effective_alpha(const RegressionSpec& spec) {
  return spec.id == RegressionId::kHolderBump ? spec.alpha : 1.0;
}

bool piecewise_aligned(const RegressionSpec& spec, std::uint64_t inv_mesh) {
  if (spec.id != RegressionId::kPiecewiseConstant) return false;
  if (spec.ref_inv_mesh == 0) return true;  // reference grid is the fit grid
  return inv_mesh % spec.ref_inv_mesh == 0;
}

}  // namespace

std::string to_string(RegressionId id) {
  switch (id) {
    case RegressionId::kPiecewiseConstant: return "piecewise_constant";
    case RegressionId::kAffine: return "affine";
    case RegressionId::kHolderBump: return "holder_bump";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(NoiseId id) {
  switch (id) {
    case NoiseId::kGaussian: return "gaussian";
    case NoiseId::kScaledT: return "scaled_t";
    case NoiseId::kHeteroscedasticGaussian: return "heteroscedastic_gaussian";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(CovariateId id) {
  switch (id) {
    case CovariateId::kUniform: return "uniform";
    case CovariateId::kBetaMixture: return "beta_mixture";
  }
  throw std::logic_error("unreachable");
}

std::string to_string(TauMode mode) {
  switch (mode) {
    case TauMode::kOracle: return "oracle";
    case TauMode::kPluginGlobal: return "plugin_global";
    case TauMode::kPluginLocal: return "plugin_local";
  }
  throw std::logic_error("unreachable");
}

RegressionId regression_id_from_string(const std::string& name) {
  if (name == "piecewise_constant") return RegressionId::kPiecewiseConstant;
  if (name == "affine") return RegressionId::kAffine;
  if (name == "holder_bump") return RegressionId::kHolderBump;
  throw std::invalid_argument("unknown regression id: " + name);
}

NoiseId noise_id_from_string(const std::string& name) {
  if (name == "gaussian") return NoiseId::kGaussian;
  if (name == "scaled_t") return NoiseId::kScaledT;
  if (name == "heteroscedastic_gaussian") return NoiseId::kHeteroscedasticGaussian;
  throw std::invalid_argument("unknown noise id: " + name);
}

CovariateId covariate_id_from_string(const std::string& name) {
  if (name == "uniform") return CovariateId::kUniform;
  if (name == "beta_mixture") return CovariateId::kBetaMixture;
  throw std::invalid_argument("unknown covariate id: " + name);
}

TauMode tau_mode_from_string(const std::string& name) {
  if (name == "oracle") return TauMode::kOracle;
  if (name == "plugin_global") return TauMode::kPluginGlobal;
  if (name == "plugin_local") return TauMode::kPluginLocal;
  throw std::invalid_argument("unknown tau mode: " + name);
}

void ScenarioConfig::validate() const {
  if (dim < 1 || dim > 16) throw std::invalid_argument("dim must be in [1, 16]");
  if (!use_mesh_rule && inv_mesh < 1) {
    throw std::invalid_argument("inv_mesh must be >= 1 (or enable the mesh rule)");
  }
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(beta > 0.0) || !(beta < 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1)");
  }
  if (regression.amplitude < 0.0) {
    throw std::invalid_argument("piecewise amplitude must be >= 0");
  }
  if (!(regression.alpha > 0.0) || regression.alpha > 1.0) {
    throw std::invalid_argument("holder alpha must lie in (0, 1]");
  }
  if (!(regression.c_h > 0.0)) {
    throw std::invalid_argument("holder constant must be > 0");
  }
  if (noise.sigma < 0.0) throw std::invalid_argument("noise sigma must be >= 0");
  if (noise.id == NoiseId::kScaledT && noise.df < 3) {
    throw std::invalid_argument("scaled_t df must be >= 3 for a finite variance");
  }
  if (covariate.weight < 0.0 || !(covariate.weight < 1.0)) {
    throw std::invalid_argument("beta_mixture weight must lie in [0, 1)");
  }
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
}

std::uint64_t ScenarioConfig::resolve_inv_mesh(std::size_t n_for_rule) const {
  if (!use_mesh_rule) return inv_mesh;
  if (n_for_rule < 3) {
    throw std::invalid_argument("mesh rule needs n >= 3");
  }
  const double nn = static_cast<double>(n_for_rule);
  const double alpha = effective_alpha(regression);
  const double exponent = 1.0 / (2.0 * alpha + static_cast<double>(dim));
  const double value = std::pow(nn / std::log(nn), exponent);
  const auto rounded = static_cast<std::uint64_t>(std::llround(value));
  return rounded < 1 ? 1 : rounded;
}

AssumptionAudit audit_assumptions(const ScenarioConfig& config) {
  config.validate();
  AssumptionAudit audit;

  const double w = config.covariate.weight;
  switch (config.covariate.id) {
    case CovariateId::kUniform:
      audit.density_lower = 1.0;
      audit.density_upper = 1.0;
      break;
    case CovariateId::kBetaMixture:
      // Per-coordinate density (1-w) + 2wt attains its extremes at t = 0, 1.
      audit.density_lower = std::pow(1.0 - w, config.dim);
      audit.density_upper = std::pow(1.0 + w, config.dim);
      break;
  }
  audit.density_bounds_ok = audit.density_lower > 0.0;

  const double s2 = config.noise.sigma * config.noise.sigma;
  switch (config.noise.id) {
    case NoiseId::kGaussian:
      audit.variance_lower = s2;
      audit.variance_upper = s2;
      audit.moment_order = kInf;
      break;
    case NoiseId::kScaledT:
      audit.variance_lower = s2;
      audit.variance_upper = s2;
      audit.moment_order = static_cast<double>(config.noise.df - 1);
      break;
    case NoiseId::kHeteroscedasticGaussian:
      audit.variance_lower = 0.5 * s2;
      audit.variance_upper = s2;
      audit.moment_order = kInf;
      break;
  }
  audit.variance_bounds_ok = audit.variance_lower > 0.0;

  switch (config.regression.id) {
    case RegressionId::kPiecewiseConstant:
      // Discontinuous, so only the trivial exponent-0 class contains it;
      // what matters is whether it is constant on the fit cells.
      audit.alpha = 0.0;
      audit.c_h = 2.0 * config.regression.amplitude;
      audit.grid_aligned_mean =
          !config.use_mesh_rule && piecewise_aligned(config.regression, config.inv_mesh);
      audit.holder_ok = true;
      break;
    case RegressionId::kAffine: {
      const double a = config.regression.a;
      const double b = config.regression.b;
      const double p = static_cast<double>(config.dim);
      const double lipschitz = std::abs(b) * std::sqrt(p);
      const double sup = std::max(std::abs(a), std::abs(a + b * p));
      audit.alpha = 1.0;
      audit.c_h = std::max(lipschitz, sup);
      audit.holder_ok = true;
      break;
    }
    case RegressionId::kHolderBump:
      audit.alpha = config.regression.alpha;
      audit.c_h = config.regression.c_h;
      audit.holder_ok = true;
      break;
  }
  return audit;
}

UndersmoothingAudit audit_undersmoothing(const ScenarioConfig& config,
                                         std::size_t n, std::uint64_t inv_mesh) {
  config.validate();
  if (n < 3 || inv_mesh < 1) {
    throw std::invalid_argument("undersmoothing audit needs n >= 3 and inv_mesh >= 1");
  }
  UndersmoothingAudit audit;
  const double nn = static_cast<double>(n);
  const double logn = std::log(nn);
  const double delta = 1.0 / static_cast<double>(inv_mesh);
  const double p = static_cast<double>(config.dim);

  if (piecewise_aligned(config.regression, inv_mesh)) {
    audit.bias_term = 0.0;  // cell-constant truth: no approximation error at all
  } else {
    const double alpha = config.regression.id == RegressionId::kPiecewiseConstant
                             ? 0.0
                             : effective_alpha(config.regression);
    audit.bias_term = nn * std::pow(delta, 2.0 * alpha + p) * logn * logn;
  }
  audit.bias_small = audit.bias_term < 1.0;

  const double nu = audit_assumptions(config).moment_order;
  const double exponent = std::isinf(nu) ? 1.0 : 1.0 - 2.0 / nu;
  audit.moment_term =
      std::pow(logn, 5.0) / (std::pow(delta, p) * std::pow(nn, exponent));
  audit.moment_small = audit.moment_term < 0.1;
  return audit;
}

double regression_value(const ScenarioConfig& config, const Grid& grid,
                        const double* x) {
  switch (config.regression.id) {
    case RegressionId::kPiecewiseConstant: {
      if (config.regression.ref_inv_mesh == 0 ||
          config.regression.ref_inv_mesh == grid.inv_mesh()) {
        return config.regression.amplitude *
               hash_to_symmetric_unit(grid.cell_index_of(x));
      }
      const Grid ref(config.dim, config.regression.ref_inv_mesh);
      return config.regression.amplitude *
             hash_to_symmetric_unit(ref.cell_index_of(x));
    }
    case RegressionId::kAffine: {
      double s = 0.0;
      for (int i = 0; i < config.dim; ++i) s += x[i];
      return config.regression.a + config.regression.b * s;
    }
    case RegressionId::kHolderBump: {
      double dist = std::abs(x[0] - 0.5);
      for (int i = 1; i < config.dim; ++i) {
        dist = std::min(dist, std::abs(x[i] - 0.5));
      }
      return config.regression.c_h * std::pow(dist, config.regression.alpha);
    }
  }
  throw std::logic_error("unreachable");
}

double covariate_density(const ScenarioConfig& config, const double* x) {
  switch (config.covariate.id) {
    case CovariateId::kUniform:
      return 1.0;
    case CovariateId::kBetaMixture: {
      const double w = config.covariate.weight;
      double density = 1.0;
      for (int i = 0; i < config.dim; ++i) {
        density *= (1.0 - w) + 2.0 * w * x[i];
      }
      return density;
    }
  }
  throw std::logic_error("unreachable");
}

double noise_variance(const ScenarioConfig& config, const double* x) {
  const double s2 = config.noise.sigma * config.noise.sigma;
  switch (config.noise.id) {
    case NoiseId::kGaussian:
    case NoiseId::kScaledT:
      return s2;
    case NoiseId::kHeteroscedasticGaussian:
      return s2 * (1.0 + x[0]) / 2.0;
  }
  throw std::logic_error("unreachable");
}

GeneratedSample generate(const ScenarioConfig& config, const Grid& grid,
                         std::uint32_t replication) {
  config.validate();
  if (grid.dim() != config.dim) {
    throw std::invalid_argument("generate: grid dimension mismatch");
  }

  GeneratedSample out;
  out.data.dim = config.dim;
  out.data.xs.resize(config.n * static_cast<std::size_t>(config.dim));
  out.data.ys.resize(config.n);
  out.true_mean.resize(config.n);
  out.noise.resize(config.n);

  PhiloxStream x_stream(config.seed, replication, rng_stage::kCovariates);
  const double w = config.covariate.weight;
  for (std::size_t i = 0; i < config.n; ++i) {
    double* xi = out.data.xs.data() + i * static_cast<std::size_t>(config.dim);
    for (int d = 0; d < config.dim; ++d) {
      switch (config.covariate.id) {
        case CovariateId::kUniform:
          xi[d] = x_stream.uniform01();
          break;
        case CovariateId::kBetaMixture: {
          // Fixed two-draw recipe per coordinate keeps consumption
          // deterministic (no rejection): pick the component, then the value.
          const double sel = x_stream.uniform01();
          const double val = x_stream.uniform01();
          xi[d] = sel < w ? std::sqrt(val) : val;
          break;
        }
      }
    }
  }

  PhiloxStream eps_stream(config.seed, replication, rng_stage::kNoise);
  const double sigma = config.noise.sigma;
  for (std::size_t i = 0; i < config.n; ++i) {
    const double* xi = out.data.xs.data() + i * static_cast<std::size_t>(config.dim);
    double eps = 0.0;
    switch (config.noise.id) {
      case NoiseId::kGaussian:
        eps = sigma * eps_stream.normal();
        break;
      case NoiseId::kScaledT: {
        const double z = eps_stream.normal();
        double chi2 = 0.0;
        for (int j = 0; j < config.noise.df; ++j) {
          const double g = eps_stream.normal();
          chi2 += g * g;
        }
        const double df = static_cast<double>(config.noise.df);
        const double t = z / std::sqrt(chi2 / df);
        eps = sigma * std::sqrt((df - 2.0) / df) * t;  // rescaled to variance sigma^2
        break;
      }
      case NoiseId::kHeteroscedasticGaussian:
        eps = std::sqrt(noise_variance(config, xi)) * eps_stream.normal();
        break;
    }
    out.noise[i] = eps;
    out.true_mean[i] = regression_value(config, grid, xi);
    out.data.ys[i] = out.true_mean[i] + eps;
  }
  return out;
}

std::vector<double> oracle_cell_probs(const ScenarioConfig& config,
                                      const Grid& grid) {
  return oracle_cell_probabilities(
      grid, [&](const std::vector<double>& x) {
        return covariate_density(config, x.data());
      });
}

TauModel oracle_tau(const ScenarioConfig& config, const Grid& grid) {
  return tau_oracle(
      grid,
      [&](const std::vector<double>& x) {
        return covariate_density(config, x.data());
      },
      [&](const std::vector<double>& x) {
        return noise_variance(config, x.data());
      });
}

int probe_points_per_axis(const ScenarioConfig& config, const Grid& grid) {
  return piecewise_aligned(config.regression, grid.inv_mesh()) ? 1 : 8;
}

}  // namespace histoband
