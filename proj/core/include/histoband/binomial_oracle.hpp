#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace histoband {

/// Exact-enumeration request for Bin(n, p) moments of order q.
/// p = 1 is admitted as a degenerate edge (all mass at k = n).
struct BinomSpec {
  std::int64_t n = 1;
  double prob = 0.5;
  int order = 2;

  void validate() const;
};

/// Maximum n for exact enumeration; above this the term loop stops being
/// a desk-scale oracle.
constexpr std::int64_t kMaxExactBinomialN = 100000;

/// E[(B - np)^q] by direct summation over k = 0..n with log-space binomial
/// weights and compensated summation.
double central_moment_exact(const BinomSpec& spec);

/// E[ 1{B>0} (1/B - 1/(np))^q ], enumerated over k = 1..n.
double truncated_inverse_moment(const BinomSpec& spec);

/// Largest relative mismatch over k = 1..n of the exact three-term expansion
///   1/k - 1/(np) = (np-k)/(np)^2 + (np-k)^2/(np)^3 + (np-k)^3/(k (np)^3),
/// relative to the natural scale max(1/k, 1/(np)).
double inverse_decomposition_max_rel_error(std::int64_t n, double prob);

struct BinomialSweepPoint {
  std::int64_t n = 0;
  double prob = 0.0;
  int order = 0;
  double np = 0.0;
  bool included = false;        // np >= 2 regime
  double central_ratio = 0.0;   // central moment / (np)^(q/2)
  double inverse_ratio = 0.0;   // truncated inverse moment / (np)^(-3q/2)
};

struct TrendVerdict {
  int order = 0;
  double max_ratio = 0.0;
  double middle_band_max = 0.0;
  double upper_band_max = 0.0;
  bool bounded = false;  // upper_band_max <= 1.2 * middle_band_max
};

struct BinomialSweepReport {
  std::vector<BinomialSweepPoint> points;
  std::vector<TrendVerdict> central_trends;   // one per q
  std::vector<TrendVerdict> inverse_trends;   // one per q
  std::size_t excluded_points = 0;
  double identity_max_rel_error = 0.0;
  bool all_bounded = false;
};

/// Enumeration sweep over the grid of (n, p, q). Points with np < 2 are
/// excluded and counted. For each q the scaled ratios are checked for an
/// upward trend by comparing band maxima over thirds of the log10(np) span:
/// bounded means max(upper third) <= 1.2 * max(middle third).
BinomialSweepReport binomial_sweep(const std::vector<std::int64_t>& ns,
                                   const std::vector<double>& ps,
                                   const std::vector<int>& qs);

/// The sweep used by `verify-binomial` when no config is given:
/// n in {50,100,...,3200}, p in {0.05,0.1,0.2}, q in {2,4}.
BinomialSweepReport default_binomial_sweep();

std::string to_json_string(const BinomialSweepReport& report);

}  // namespace histoband
