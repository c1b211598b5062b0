#pragma once

// Design-based estimators over respondent records: post-stratified weights,
// expanded report totals, the mean frame-degree estimator, and the hidden
// population size estimators (basic and awareness-generalized).
//
// Respondents who reported a positive degree but answered no detail
// questions carry an undefined expansion factor; they are excluded from
// every sum and the exclusion is surfaced through excluded_record_count().

#include <cmath>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreport/survey.hpp"

namespace netreport {

class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& what)
      : std::runtime_error(what) {}
};

struct FrameMargins {
  std::map<std::string, long long> by_group;

  long long total() const {
    long long t = 0;
    for (const auto& [_, n] : by_group) t += n;
    return t;
  }

  void validate() const {
    if (by_group.empty()) throw std::invalid_argument("empty frame margins");
    for (const auto& [g, n] : by_group) {
      if (n <= 0) {
        throw std::invalid_argument("non-positive margin for group " + g);
      }
    }
  }

  static FrameMargins from_population(const Population& pop) {
    FrameMargins m;
    m.by_group = pop.frame_group_counts();
    return m;
  }
};

// Design and post-stratified weights aligned with the record list they were
// built from.  After calibration every group with respondents satisfies
// sum_{i in group} calibrated[i] == margin exactly.
struct WeightSet {
  std::vector<double> design;
  std::vector<double> calibrated;
  FrameMargins margins;
  std::vector<std::string> empty_margin_groups;  // margins with no respondents
};

inline WeightSet poststratify(std::span<const RespondentRecord> records,
                              const FrameMargins& margins) {
  margins.validate();
  std::map<std::string, double> design_sum;
  for (const auto& rec : records) {
    if (rec.design_weight <= 0.0) {
      throw std::invalid_argument("design weight must be positive");
    }
    if (margins.by_group.find(rec.group) == margins.by_group.end()) {
      throw std::invalid_argument("respondent group missing from margins: " +
                                  rec.group);
    }
    design_sum[rec.group] += rec.design_weight;
  }
  std::map<std::string, double> factor;
  WeightSet out;
  out.margins = margins;
  for (const auto& [group, margin] : margins.by_group) {
    auto it = design_sum.find(group);
    if (it == design_sum.end()) {
      out.empty_margin_groups.push_back(group);
    } else {
      factor[group] = static_cast<double>(margin) / it->second;
    }
  }
  out.design.reserve(records.size());
  out.calibrated.reserve(records.size());
  for (const auto& rec : records) {
    out.design.push_back(rec.design_weight);
    out.calibrated.push_back(rec.design_weight * factor.at(rec.group));
  }
  return out;
}

// Records excluded from every estimator sum: positive reported degree with
// no detail answers, where the subsample expansion d/r is undefined.
inline bool is_excluded(const RespondentRecord& rec) {
  return rec.degree > 0 && rec.alter_count() == 0;
}

inline int excluded_record_count(std::span<const RespondentRecord> records) {
  int n = 0;
  for (const auto& rec : records) n += is_excluded(rec) ? 1 : 0;
  return n;
}

using AlterPredicate =
    std::function<bool(const RespondentRecord&, const AlterReport&)>;

inline AlterPredicate alters_reported_hidden() {
  return [](const RespondentRecord&, const AlterReport& a) {
    return a.reported_hidden;
  };
}
inline AlterPredicate alters_reported_frame() {
  return [](const RespondentRecord&, const AlterReport& a) {
    return a.reported_frame;
  };
}
inline AlterPredicate alters_reported_aware_frame() {
  return [](const RespondentRecord&, const AlterReport& a) {
    return a.reported_frame && a.reported_aware;
  };
}

namespace detail {

inline void check_weights(std::span<const RespondentRecord> records,
                          std::span<const double> weights) {
  if (records.size() != weights.size()) {
    throw std::invalid_argument("weights not aligned with records");
  }
}

// sum_i w_i (d_i/r_i) counted_i over non-excluded records.
inline double expanded_total(std::span<const RespondentRecord> records,
                             std::span<const double> weights,
                             const AlterPredicate& counted) {
  check_weights(records, weights);
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (is_excluded(rec) || rec.degree == 0) continue;
    int count = 0;
    for (const auto& a : rec.alters) count += counted(rec, a) ? 1 : 0;
    total += weights[i] * (static_cast<double>(rec.degree) / rec.alter_count()) *
             count;
  }
  return total;
}

inline double weight_total(std::span<const RespondentRecord> records,
                           std::span<const double> weights) {
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (is_excluded(records[i])) continue;
    total += weights[i];
  }
  return total;
}

}  // namespace detail

// Expanded total of reported connections to alters matching the predicate;
// with an always-true predicate this is the estimated total network size
// sum_i w_i d_i.
inline double reported_connection_total(std::span<const RespondentRecord> records,
                                        std::span<const double> weights,
                                        const AlterPredicate& counted) {
  return detail::expanded_total(records, weights, counted);
}

// Estimated total connections from frame members to the hidden population.
inline double hidden_connection_total(std::span<const RespondentRecord> records,
                                      std::span<const double> weights) {
  return detail::expanded_total(records, weights, alters_reported_hidden());
}

// Estimated mean number of frame members a frame member is connected to.
inline double mean_frame_degree(std::span<const RespondentRecord> records,
                                std::span<const double> weights) {
  const double wsum = detail::weight_total(records, weights);
  if (wsum <= 0.0) throw EstimationError("zero total weight");
  return detail::expanded_total(records, weights, alters_reported_frame()) / wsum;
}

// Hidden population size: expanded hidden-report total divided by the mean
// frame degree.
inline double hidden_population_size(std::span<const RespondentRecord> records,
                                     std::span<const double> weights) {
  const double denominator = mean_frame_degree(records, weights);
  if (denominator <= 0.0) {
    throw EstimationError("degenerate denominator: estimated mean frame degree is zero");
  }
  return hidden_connection_total(records, weights) / denominator;
}

// Generalized variant: the denominator counts alters that are frame members
// and aware of the respondent's hidden-population membership, approximating
// visibility directly.  With awareness everywhere the two estimators agree
// exactly.
inline double hidden_population_size_generalized(
    std::span<const RespondentRecord> records, std::span<const double> weights) {
  const double wsum = detail::weight_total(records, weights);
  if (wsum <= 0.0) throw EstimationError("zero total weight");
  const double denominator =
      detail::expanded_total(records, weights, alters_reported_aware_frame()) /
      wsum;
  if (denominator <= 0.0) {
    throw EstimationError(
        "degenerate denominator: no aware frame alters reported");
  }
  return hidden_connection_total(records, weights) / denominator;
}

// Weighted mean reported degree with its weight total, the per-dataset
// summary row reported alongside size estimates.
inline double mean_reported_degree(std::span<const RespondentRecord> records,
                                   std::span<const double> weights) {
  detail::check_weights(records, weights);
  double wsum = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    wsum += weights[i];
    total += weights[i] * records[i].degree;
  }
  if (wsum <= 0.0) throw EstimationError("zero total weight");
  return total / wsum;
}

}  // namespace netreport
