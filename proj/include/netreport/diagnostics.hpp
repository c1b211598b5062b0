#pragma once

// Internal consistency checks.  For a demographic group, the total number of
// frame connections from the group to the rest of the frame equals the total
// in the other direction, but the two sides can be estimated from disjoint
// sets of respondents.  The scaled gap between those estimates measures how
// internally consistent network reports are, and the total-absolute-error
// gap compares two tie definitions by that measure.

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreport/digest.hpp"
#include "netreport/estimators.hpp"
#include "netreport/uncertainty.hpp"

namespace netreport {

struct ConsistencyCheck {
  std::string group;
  double delta = 0.0;      // scaled gap
  double delta_raw = 0.0;  // unscaled gap between the two estimates
  double scale_k = 0.0;    // N_F / (N_{F,-group} * N_{F,group})
  std::vector<double> replicates;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int respondents_in = 0;
  int respondents_out = 0;
};

namespace detail {

struct GroupSplit {
  int in = 0;
  int out = 0;
};

inline GroupSplit group_split(std::span<const RespondentRecord> records,
                              const std::string& group) {
  GroupSplit s;
  for (const auto& rec : records) {
    (rec.group == group ? s.in : s.out) += 1;
  }
  return s;
}

// Unscaled gap: cross-group connection total estimated from respondents
// outside the group minus the same total estimated from respondents inside.
inline double consistency_gap(std::span<const RespondentRecord> records,
                              std::span<const double> weights,
                              const std::string& group) {
  AlterPredicate frame_in_group = [&group](const RespondentRecord& rec,
                                           const AlterReport& a) {
    return rec.group != group && a.reported_frame && a.group == group;
  };
  AlterPredicate frame_outside_group = [&group](const RespondentRecord& rec,
                                                const AlterReport& a) {
    return rec.group == group && a.reported_frame && a.group != group;
  };
  const double from_outside =
      reported_connection_total(records, weights, frame_in_group);
  const double from_inside =
      reported_connection_total(records, weights, frame_outside_group);
  return from_outside - from_inside;
}

inline double consistency_scale(const FrameMargins& margins,
                                const std::string& group) {
  auto it = margins.by_group.find(group);
  if (it == margins.by_group.end()) {
    throw std::invalid_argument("group missing from margins: " + group);
  }
  const double n_group = static_cast<double>(it->second);
  const double n_frame = static_cast<double>(margins.total());
  const double n_rest = n_frame - n_group;
  if (n_rest <= 0.0) {
    throw std::invalid_argument("group covers the whole frame: " + group);
  }
  return n_frame / (n_rest * n_group);
}

}  // namespace detail

// Point-estimate check for one group; replicates and interval left empty.
inline ConsistencyCheck consistency_check(
    std::span<const RespondentRecord> records, const WeightSet& weights,
    const FrameMargins& margins, const std::string& group) {
  const auto split = detail::group_split(records, group);
  if (split.in == 0 || split.out == 0) {
    throw EstimationError("one-sided check undefined for group " + group);
  }
  ConsistencyCheck check;
  check.group = group;
  check.respondents_in = split.in;
  check.respondents_out = split.out;
  check.scale_k = detail::consistency_scale(margins, group);
  check.delta_raw =
      detail::consistency_gap(records, weights.calibrated, group);
  check.delta = check.scale_k * check.delta_raw;
  return check;
}

// Checks for every margin group, sharing one set of bootstrap replicate
// weights so the per-replicate gaps are coherent across groups.  Groups with
// respondents on only one side are skipped and reported through `skipped`.
inline std::vector<ConsistencyCheck> consistency_checks_bootstrap(
    std::span<const RespondentRecord> records, const FrameMargins& margins,
    const BootstrapConfig& config,
    std::vector<std::string>* skipped = nullptr) {
  const WeightSet base = poststratify(records, margins);
  std::vector<ConsistencyCheck> checks;
  for (const auto& [group, _] : margins.by_group) {
    const auto split = detail::group_split(records, group);
    if (split.in == 0 || split.out == 0) {
      if (skipped) skipped->push_back(group);
      continue;
    }
    checks.push_back(consistency_check(records, base, margins, group));
  }

  const auto reps = replicate_weights(records, base.design, margins, config);
  for (const auto& rep : reps) {
    if (rep.degenerate) continue;
    for (auto& check : checks) {
      check.replicates.push_back(
          check.scale_k *
          detail::consistency_gap(records, rep.weights, check.group));
    }
  }
  for (auto& check : checks) {
    const auto [lo, hi] = percentile_interval(check.replicates, config.ci_level);
    check.ci_low = lo;
    check.ci_high = hi;
  }
  return checks;
}

// Total absolute error gap between two tie definitions over aligned group
// checks: positive values mean the second list's reports are more internally
// consistent.
inline double total_absolute_error_gap(
    std::span<const ConsistencyCheck> first,
    std::span<const ConsistencyCheck> second) {
  if (first.size() != second.size()) {
    throw std::invalid_argument("mismatched group sets");
  }
  double gap = 0.0;
  for (std::size_t k = 0; k < first.size(); ++k) {
    if (first[k].group != second[k].group) {
      throw std::invalid_argument("mismatched group sets");
    }
    gap += std::abs(first[k].delta) - std::abs(second[k].delta);
  }
  return gap;
}

inline std::string tae_interpretation(double tae) {
  if (tae > 0.0) return "second tie definition more internally consistent";
  if (tae < 0.0) return "first tie definition more internally consistent";
  return "tie definitions equally consistent";
}

// Content signature of a record list; seeds the arm-specific replicate
// streams in tae_distribution.
inline std::uint64_t record_stream_signature(
    std::span<const RespondentRecord> records) {
  std::uint64_t h = kFnvOffset;
  for (const auto& rec : records) {
    h = fnv1a64(rec.respondent_id, h);
    h = fnv1a64(rec.group, h);
    h = fnv1a64_mix(static_cast<std::uint64_t>(rec.degree), h);
    for (const auto& a : rec.alters) {
      h = fnv1a64_mix((a.reported_hidden ? 1 : 0) | (a.reported_frame ? 2 : 0) |
                          (a.reported_aware ? 4 : 0),
                      h);
      h = fnv1a64(a.group, h);
    }
  }
  return h;
}

// Sampling distribution of the gap.  The two arms are independent samples by
// design, so each is resampled from its own stream; streams are derived from
// the records themselves, which keeps runs reproducible and makes the
// distribution collapse to exactly 0 when both arms carry identical data.
inline EstimateWithCI tae_distribution(
    std::span<const RespondentRecord> first_records,
    std::span<const RespondentRecord> second_records,
    const FrameMargins& margins, const BootstrapConfig& config) {
  if (first_records.empty() || second_records.empty()) {
    throw std::invalid_argument("both record sets must be nonempty");
  }
  BootstrapConfig first_config = config;
  first_config.seed =
      derive_seed(config.seed, record_stream_signature(first_records));
  BootstrapConfig second_config = config;
  second_config.seed =
      derive_seed(config.seed, record_stream_signature(second_records));

  const auto first =
      consistency_checks_bootstrap(first_records, margins, first_config);
  const auto second =
      consistency_checks_bootstrap(second_records, margins, second_config);

  EstimateWithCI result;
  result.level = config.ci_level;
  result.point = total_absolute_error_gap(first, second);

  std::size_t n_reps = first.empty() ? 0 : first.front().replicates.size();
  for (const auto& c : first) n_reps = std::min(n_reps, c.replicates.size());
  for (const auto& c : second) n_reps = std::min(n_reps, c.replicates.size());
  for (std::size_t r = 0; r < n_reps; ++r) {
    double gap = 0.0;
    for (std::size_t k = 0; k < first.size(); ++k) {
      gap += std::abs(first[k].replicates[r]) -
             std::abs(second[k].replicates[r]);
    }
    result.replicates.push_back(gap);
  }
  const auto [lo, hi] = percentile_interval(result.replicates, config.ci_level);
  result.ci_low = lo;
  result.ci_high = hi;
  return result;
}

}  // namespace netreport
