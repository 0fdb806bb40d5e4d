#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "histoband/dataset.hpp"
#include "histoband/estimators.hpp"
#include "histoband/grid.hpp"
#include "histoband/rng.hpp"

namespace histoband {

enum class RegressionId { kPiecewiseConstant, kAffine, kHolderBump };
enum class NoiseId { kGaussian, kScaledT, kHeteroscedasticGaussian };
enum class CovariateId { kUniform, kBetaMixture };

/// How the band's scale parameter is obtained in an experiment.
enum class TauMode { kOracle, kPluginGlobal, kPluginLocal };

std::string to_string(RegressionId id);
std::string to_string(NoiseId id);
std::string to_string(CovariateId id);
std::string to_string(TauMode mode);
RegressionId regression_id_from_string(const std::string& name);
NoiseId noise_id_from_string(const std::string& name);
CovariateId covariate_id_from_string(const std::string& name);
TauMode tau_mode_from_string(const std::string& name);

struct RegressionSpec {
  RegressionId id = RegressionId::kPiecewiseConstant;
  // piecewise_constant: cell values hash-derived in [-amplitude, amplitude]
  // on a reference grid (ref_inv_mesh = 0 -> the fit grid itself).
  double amplitude = 1.0;
  std::uint64_t ref_inv_mesh = 0;
  // affine: a + b * sum_i x_i
  double a = 0.0;
  double b = 1.0;
  // holder_bump: c_h * min_i |x_i - 1/2|^alpha
  double alpha = 1.0;
  double c_h = 1.0;
};

struct NoiseSpec {
  NoiseId id = NoiseId::kGaussian;
  // gaussian: sd sigma; scaled_t: target sd sigma, df degrees of freedom;
  // heteroscedastic_gaussian: sigma^2(x) = sigma^2 * (1 + x_1) / 2.
  double sigma = 1.0;
  int df = 5;
};

struct CovariateSpec {
  CovariateId id = CovariateId::kUniform;
  // beta_mixture: each coordinate has density (1 - weight) + 2 * weight * t.
  double weight = 0.5;
};

struct ScenarioConfig {
  int dim = 1;
  std::uint64_t inv_mesh = 10;
  // When set, inv_mesh is derived per n as round((n / log n)^{1/(2*alpha+dim)}).
  bool use_mesh_rule = false;
  std::size_t n = 1000;
  RegressionSpec regression;
  NoiseSpec noise;
  CovariateSpec covariate;
  double beta = 0.1;
  TauMode tau_mode = TauMode::kPluginLocal;
  std::size_t replications = 100;
  std::uint64_t seed = 1;

  void validate() const;

  /// Grid resolution for sample size n (applies the mesh rule if enabled).
  std::uint64_t resolve_inv_mesh(std::size_t n_for_rule) const;
};

/// Symbolic record of the model assumptions satisfied by the configured
/// laws. Filled from closed-form knowledge of the library, not estimated.
struct AssumptionAudit {
  double density_lower = 0.0;   // inf of the covariate density
  double density_upper = 0.0;   // sup of the covariate density
  double variance_lower = 0.0;  // inf of sigma^2(x)
  double variance_upper = 0.0;  // sup of sigma^2(x)
  double alpha = 0.0;           // Holder exponent of the mean function
  double c_h = 0.0;             // Holder constant (also sup-norm bound)
  double moment_order = 0.0;    // largest finite noise moment; +inf for gaussian
  bool grid_aligned_mean = false;
  bool density_bounds_ok = false;
  bool variance_bounds_ok = false;
  bool holder_ok = false;
};

/// Undersmoothing diagnostics: the bias term n * delta^{2a+p} * (log n)^2
/// should be < 1 and the moment term (log n)^5 / (delta^p n^{1-2/nu}) < 0.1
/// for the band's nominal level to be trustworthy.
struct UndersmoothingAudit {
  double bias_term = 0.0;
  double moment_term = 0.0;
  bool bias_small = false;
  bool moment_small = false;
};

AssumptionAudit audit_assumptions(const ScenarioConfig& config);
UndersmoothingAudit audit_undersmoothing(const ScenarioConfig& config,
                                         std::size_t n, std::uint64_t inv_mesh);

/// True regression value m(x) for the configured family; `grid` supplies the
/// reference partition for the piecewise-constant family.
double regression_value(const ScenarioConfig& config, const Grid& grid,
                        const double* x);

/// Covariate density f_X(x) in closed form (product over coordinates).
double covariate_density(const ScenarioConfig& config, const double* x);

/// Noise variance sigma^2(x) in closed form.
double noise_variance(const ScenarioConfig& config, const double* x);

struct GeneratedSample {
  Dataset data;
  std::vector<double> true_mean;  // m(X_i)
  std::vector<double> noise;      // eps_i; Y_i = true_mean[i] + noise[i]
};

/// Draws n i.i.d. pairs using streams keyed by (seed, replication, stage),
/// so each replication is independent of how others are scheduled.
GeneratedSample generate(const ScenarioConfig& config, const Grid& grid,
                         std::uint32_t replication);

/// Oracle cell masses and band scale from the closed-form laws.
std::vector<double> oracle_cell_probs(const ScenarioConfig& config,
                                      const Grid& grid);
TauModel oracle_tau(const ScenarioConfig& config, const Grid& grid);

/// Probe resolution for sup-norm evaluations: piecewise-constant truth
/// aligned with the grid is exact with one probe; anything else gets 8.
int probe_points_per_axis(const ScenarioConfig& config, const Grid& grid);

}  // namespace histoband
