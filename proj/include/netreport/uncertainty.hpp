#pragma once

// Rescaled bootstrap replicate weights with per-replicate post-stratification.
// Each replicate draws m units with replacement from the n respondents
// (single stratum), rescales the design weights as
//
//   w*_i = w0_i * (1 - sqrt(m/(n-1)) + sqrt(m/(n-1)) * (n/m) * t_i),
//
// where t_i counts how often unit i was drawn, and then calibrates the
// replicate weights to the frame margins.  The default m = n-1 collapses the
// rescaling to w*_i = w0_i * (n/(n-1)) * t_i.
//
// Replicate r draws its randomness from the derived seed (seed, r), so the
// replicate set is reproducible and independent of evaluation order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "netreport/estimators.hpp"
#include "netreport/rng.hpp"

namespace netreport {

struct BootstrapConfig {
  int replicates = 1000;
  std::optional<int> resample_size;  // m; default n-1
  std::uint64_t seed = 0;
  double ci_level = 0.95;

  void validate(std::size_t n) const {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    if (n < 2) throw std::invalid_argument("bootstrap needs n >= 2 respondents");
    if (resample_size) {
      if (*resample_size < 1 || *resample_size > static_cast<int>(n) - 1) {
        throw std::invalid_argument("resample size must be in [1, n-1]");
      }
    }
    if (ci_level <= 0.0 || ci_level >= 1.0) {
      throw std::invalid_argument("ci level must be in (0,1)");
    }
  }
};

struct ReplicateWeightSet {
  std::vector<double> weights;  // post-stratified unless degenerate
  bool degenerate = false;      // a margin cell lost all its replicate weight
};

namespace detail {

inline ReplicateWeightSet one_replicate_weights(
    std::span<const RespondentRecord> records,
    std::span<const double> design_weights, const FrameMargins& margins, int m,
    Rng& rng) {
  const std::size_t n = records.size();
  std::vector<int> draws(n, 0);
  for (int k = 0; k < m; ++k) {
    ++draws[static_cast<std::size_t>(rng.below(n))];
  }
  const double lambda =
      std::sqrt(static_cast<double>(m) / static_cast<double>(n - 1));
  const double scale = lambda * static_cast<double>(n) / m;

  ReplicateWeightSet out;
  out.weights.resize(n);
  std::map<std::string, double> group_sum;
  for (std::size_t i = 0; i < n; ++i) {
    out.weights[i] = design_weights[i] * (1.0 - lambda + scale * draws[i]);
    group_sum[records[i].group] += out.weights[i];
  }
  // Calibrate to margins; a cell whose respondents all drew zero weight
  // cannot be calibrated and marks the replicate degenerate.
  for (const auto& [group, sum] : group_sum) {
    if (sum <= 0.0) {
      out.degenerate = true;
      return out;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double margin =
        static_cast<double>(margins.by_group.at(records[i].group));
    out.weights[i] *= margin / group_sum.at(records[i].group);
  }
  return out;
}

// Percentile pair from sorted replicate values: order statistics at
// positions (B*alpha/2, B+1-B*alpha/2), linearly interpolated between
// neighbors when the position is fractional and clamped to [1, B].
inline double order_statistic(const std::vector<double>& sorted, double h) {
  // Snap positions that are integers up to floating point noise.
  if (std::abs(h - std::round(h)) < 1e-9) h = std::round(h);
  const double hc = std::clamp(h, 1.0, static_cast<double>(sorted.size()));
  const std::size_t lo = static_cast<std::size_t>(std::floor(hc));
  const double frac = hc - static_cast<double>(lo);
  if (frac == 0.0 || lo >= sorted.size()) return sorted[lo - 1];
  return sorted[lo - 1] + frac * (sorted[lo] - sorted[lo - 1]);
}

}  // namespace detail

inline std::pair<double, double> percentile_interval(std::vector<double> values,
                                                     double level) {
  if (values.empty()) {
    throw std::invalid_argument("percentile interval of an empty sample");
  }
  std::sort(values.begin(), values.end());
  const double b = static_cast<double>(values.size());
  const double k = b * (1.0 - level) / 2.0;
  return {detail::order_statistic(values, k),
          detail::order_statistic(values, b + 1.0 - k)};
}

// Raw rescaled replicate weights without calibration, for variance checks of
// fixed-weight linear statistics.
inline std::vector<std::vector<double>> replicate_weights_uncalibrated(
    std::size_t n_records, std::span<const double> design_weights,
    const BootstrapConfig& config) {
  config.validate(n_records);
  const int n = static_cast<int>(n_records);
  const int m = config.resample_size.value_or(n - 1);
  const double lambda =
      std::sqrt(static_cast<double>(m) / static_cast<double>(n - 1));
  const double scale = lambda * static_cast<double>(n) / m;

  std::vector<std::vector<double>> out;
  out.reserve(config.replicates);
  for (int r = 0; r < config.replicates; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    std::vector<int> draws(n_records, 0);
    for (int k = 0; k < m; ++k) {
      ++draws[static_cast<std::size_t>(rng.below(n_records))];
    }
    std::vector<double> weights(n_records);
    for (std::size_t i = 0; i < n_records; ++i) {
      weights[i] = design_weights[i] * (1.0 - lambda + scale * draws[i]);
    }
    out.push_back(std::move(weights));
  }
  return out;
}

// All replicate weight-sets for a record list.  Degenerate replicates are
// returned with the flag set; callers decide whether to skip or fail.
inline std::vector<ReplicateWeightSet> replicate_weights(
    std::span<const RespondentRecord> records,
    std::span<const double> design_weights, const FrameMargins& margins,
    const BootstrapConfig& config) {
  config.validate(records.size());
  if (design_weights.size() != records.size()) {
    throw std::invalid_argument("weights not aligned with records");
  }
  const int n = static_cast<int>(records.size());
  const int m = config.resample_size.value_or(n - 1);

  std::vector<ReplicateWeightSet> out;
  out.reserve(config.replicates);
  for (int r = 0; r < config.replicates; ++r) {
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
    out.push_back(detail::one_replicate_weights(records, design_weights,
                                                margins, m, rng));
  }
  return out;
}

struct EstimateWithCI {
  double point = 0.0;
  std::vector<double> replicates;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double level = 0.95;
  int degenerate_replicates = 0;
};

// Estimator over records and a weight vector; return nullopt for replicate
// weight-sets on which the estimate is undefined.
using EstimatorFn = std::function<std::optional<double>(
    std::span<const RespondentRecord>, std::span<const double>)>;

// Point estimate on the calibrated full-sample weights plus a percentile
// interval over replicate estimates.  Degenerate replicates (uncalibratable
// weights or an undefined estimate) are excluded and counted; more than 1%
// of them is an error.
inline EstimateWithCI bootstrap_estimate(
    std::span<const RespondentRecord> records, const FrameMargins& margins,
    const BootstrapConfig& config, const EstimatorFn& estimator) {
  const WeightSet base = poststratify(records, margins);
  const std::optional<double> point = estimator(records, base.calibrated);
  if (!point) {
    throw EstimationError("estimator undefined on the full sample");
  }

  EstimateWithCI result;
  result.point = *point;
  result.level = config.ci_level;

  const auto reps =
      replicate_weights(records, base.design, margins, config);
  result.replicates.reserve(reps.size());
  for (const auto& rep : reps) {
    if (rep.degenerate) {
      ++result.degenerate_replicates;
      continue;
    }
    const std::optional<double> value = estimator(records, rep.weights);
    if (!value) {
      ++result.degenerate_replicates;
      continue;
    }
    result.replicates.push_back(*value);
  }
  if (result.degenerate_replicates >
      0.01 * static_cast<double>(config.replicates)) {
    throw EstimationError(
        "more than 1% of bootstrap replicates were degenerate (" +
        std::to_string(result.degenerate_replicates) + " of " +
        std::to_string(config.replicates) + ")");
  }
  const auto [lo, hi] = percentile_interval(result.replicates, config.ci_level);
  result.ci_low = lo;
  result.ci_high = hi;
  return result;
}

}  // namespace netreport
