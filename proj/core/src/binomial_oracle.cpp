#include "histoband/binomial_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace histoband {
namespace {

/// Neumaier-compensated accumulator. The sweep sums up to 1e5 terms of
/// wildly different magnitude, and the trend checks care about small ratios.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double value) {
    const double t = sum + value;
    if (std::abs(sum) >= std::abs(value)) {
      comp += (sum - t) + value;
    } else {
      comp += (value - t) + sum;
    }
    sum = t;
  }

  double result() const { return sum + comp; }
};

double log_binom_pmf(std::int64_t n, std::int64_t k, double log_p, double log_q) {
  return std::lgamma(static_cast<double>(n) + 1.0) -
         std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0) +
         static_cast<double>(k) * log_p + static_cast<double>(n - k) * log_q;
}

}  // namespace

void BinomSpec::validate() const {
  if (n < 1 || n > kMaxExactBinomialN) {
    throw std::invalid_argument("binomial n out of range [1, 100000]");
  }
  if (!(prob > 0.0) || prob > 1.0) {
    throw std::invalid_argument("binomial prob must lie in (0, 1]");
  }
  if (order < 2) {
    throw std::invalid_argument("binomial moment order must be >= 2");
  }
}

double central_moment_exact(const BinomSpec& spec) {
  spec.validate();
  if (spec.prob == 1.0) return 0.0;  // point mass at n, deviation identically 0

  const double np = static_cast<double>(spec.n) * spec.prob;
  const double log_p = std::log(spec.prob);
  const double log_q = std::log1p(-spec.prob);
  CompensatedSum acc;
  for (std::int64_t k = 0; k <= spec.n; ++k) {
    const double d = static_cast<double>(k) - np;
    if (d == 0.0) continue;
    const double magnitude =
        std::exp(log_binom_pmf(spec.n, k, log_p, log_q) +
                 static_cast<double>(spec.order) * std::log(std::abs(d)));
    const bool negative = d < 0.0 && (spec.order % 2 != 0);
    acc.add(negative ? -magnitude : magnitude);
  }
  return acc.result();
}

double truncated_inverse_moment(const BinomSpec& spec) {
  spec.validate();
  if (spec.prob == 1.0) return 0.0;  // B == n almost surely and 1/n - 1/(np) = 0

  const double inv_np = 1.0 / (static_cast<double>(spec.n) * spec.prob);
  const double log_p = std::log(spec.prob);
  const double log_q = std::log1p(-spec.prob);
  CompensatedSum acc;
  for (std::int64_t k = 1; k <= spec.n; ++k) {
    const double v = 1.0 / static_cast<double>(k) - inv_np;
    if (v == 0.0) continue;
    const double w = std::exp(log_binom_pmf(spec.n, k, log_p, log_q));
    acc.add(w * std::pow(v, spec.order));
  }
  return acc.result();
}

double inverse_decomposition_max_rel_error(std::int64_t n, double prob) {
  BinomSpec probe{n, prob, 2};
  probe.validate();
  const double np = static_cast<double>(n) * prob;
  const double np2 = np * np;
  const double np3 = np2 * np;
  double worst = 0.0;
  for (std::int64_t k = 1; k <= n; ++k) {
    const double kd = static_cast<double>(k);
    const double d = np - kd;
    const double lhs = 1.0 / kd - 1.0 / np;
    const double rhs = d / np2 + (d * d) / np3 + (d * d * d) / (kd * np3);
    const double scale = std::max(1.0 / kd, 1.0 / np);
    worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

namespace {

TrendVerdict trend_for_order(const std::vector<BinomialSweepPoint>& points,
                             int order, bool use_inverse) {
  TrendVerdict verdict;
  verdict.order = order;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& pt : points) {
    if (!pt.included || pt.order != order) continue;
    const double x = std::log10(pt.np);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    verdict.max_ratio =
        std::max(verdict.max_ratio, use_inverse ? pt.inverse_ratio : pt.central_ratio);
  }
  if (!(hi > lo)) {
    // All points share one np (or none exist): nothing to trend against.
    verdict.middle_band_max = verdict.max_ratio;
    verdict.upper_band_max = verdict.max_ratio;
    verdict.bounded = true;
    return verdict;
  }

  const double span = hi - lo;
  double middle = 0.0, upper = 0.0, below_upper = 0.0;
  bool middle_seen = false;
  for (const auto& pt : points) {
    if (!pt.included || pt.order != order) continue;
    const double x = std::log10(pt.np);
    const double r = use_inverse ? pt.inverse_ratio : pt.central_ratio;
    if (x >= lo + 2.0 * span / 3.0) {
      upper = std::max(upper, r);
    } else {
      below_upper = std::max(below_upper, r);
      if (x >= lo + span / 3.0) {
        middle = std::max(middle, r);
        middle_seen = true;
      }
    }
  }
  verdict.middle_band_max = middle_seen ? middle : below_upper;
  verdict.upper_band_max = upper;
  verdict.bounded = upper <= 1.2 * verdict.middle_band_max;
  return verdict;
}

}  // namespace

BinomialSweepReport binomial_sweep(const std::vector<std::int64_t>& ns,
                                   const std::vector<double>& ps,
                                   const std::vector<int>& qs) {
  if (ns.empty() || ps.empty() || qs.empty()) {
    throw std::invalid_argument("binomial sweep grid must be nonempty");
  }
  BinomialSweepReport report;
  for (int q : qs) {
    for (std::int64_t n : ns) {
      for (double p : ps) {
        BinomSpec spec{n, p, q};
        spec.validate();
        BinomialSweepPoint pt;
        pt.n = n;
        pt.prob = p;
        pt.order = q;
        pt.np = static_cast<double>(n) * p;
        pt.included = pt.np >= 2.0;
        if (pt.included) {
          const double half_q = 0.5 * static_cast<double>(q);
          pt.central_ratio = central_moment_exact(spec) / std::pow(pt.np, half_q);
          pt.inverse_ratio = truncated_inverse_moment(spec) / std::pow(pt.np, -3.0 * half_q);
        } else {
          ++report.excluded_points;
        }
        report.points.push_back(pt);
      }
    }
  }

  for (int q : qs) {
    report.central_trends.push_back(trend_for_order(report.points, q, false));
    report.inverse_trends.push_back(trend_for_order(report.points, q, true));
  }
  report.all_bounded = true;
  for (const auto& v : report.central_trends) report.all_bounded &= v.bounded;
  for (const auto& v : report.inverse_trends) report.all_bounded &= v.bounded;

  // The expansion identity only involves (n, p); check it once per pair.
  for (std::int64_t n : ns) {
    for (double p : ps) {
      if (static_cast<double>(n) * p < 2.0) continue;
      report.identity_max_rel_error = std::max(
          report.identity_max_rel_error, inverse_decomposition_max_rel_error(n, p));
    }
  }
  return report;
}

BinomialSweepReport default_binomial_sweep() {
  return binomial_sweep({50, 100, 200, 400, 800, 1600, 3200},
                        {0.05, 0.1, 0.2}, {2, 4});
}

namespace {

nlohmann::json trend_to_json(const TrendVerdict& v) {
  return nlohmann::json{{"bounded", v.bounded},
                        {"max_ratio", v.max_ratio},
                        {"middle_band_max", v.middle_band_max},
                        {"order", v.order},
                        {"upper_band_max", v.upper_band_max}};
}

}  // namespace

std::string to_json_string(const BinomialSweepReport& report) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : report.points) {
    points.push_back({{"central_ratio", pt.central_ratio},
                      {"included", pt.included},
                      {"inverse_ratio", pt.inverse_ratio},
                      {"n", pt.n},
                      {"np", pt.np},
                      {"order", pt.order},
                      {"prob", pt.prob}});
  }
  nlohmann::json central = nlohmann::json::array();
  for (const auto& v : report.central_trends) central.push_back(trend_to_json(v));
  nlohmann::json inverse = nlohmann::json::array();
  for (const auto& v : report.inverse_trends) inverse.push_back(trend_to_json(v));

  nlohmann::json out{{"all_bounded", report.all_bounded},
                     {"kind", "binomial_sweep"},
                     {"schema", 1},
                     {"central_trends", central},
                     {"excluded_points", report.excluded_points},
                     {"identity_max_rel_error", report.identity_max_rel_error},
                     {"inverse_trends", inverse},
                     {"points", points}};
  return out.dump(2);
}

}  // namespace histoband
