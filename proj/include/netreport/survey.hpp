#pragma once

// Two-phase interview simulation on a synthetic population: probability
// sampling of frame members, degree reports, detailed-alter subsampling, and
// reporting-error injection.  Produces the same record format the io module
// reads from files, so simulated and real data share one pipeline.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreport/population.hpp"
#include "netreport/rng.hpp"

namespace netreport {

struct AlterReport {
  bool reported_hidden = false;  // contributes to o_i
  bool reported_frame = false;   // contributes to f_i
  std::string group;
  bool reported_aware = false;   // with reported_frame, contributes to z_i
};

struct RespondentRecord {
  std::string respondent_id;
  std::string group;
  double design_weight = 1.0;
  int degree = 0;  // as reported
  std::vector<AlterReport> alters;

  int alter_count() const { return static_cast<int>(alters.size()); }

  int hidden_report_count() const {
    int n = 0;
    for (const auto& a : alters) n += a.reported_hidden ? 1 : 0;
    return n;
  }
  int frame_report_count() const {
    int n = 0;
    for (const auto& a : alters) n += a.reported_frame ? 1 : 0;
    return n;
  }
  int aware_frame_report_count() const {
    int n = 0;
    for (const auto& a : alters) {
      n += (a.reported_frame && a.reported_aware) ? 1 : 0;
    }
    return n;
  }

  void validate() const {
    if (design_weight <= 0.0) {
      throw std::invalid_argument("design weight must be positive");
    }
    if (degree < 0) throw std::invalid_argument("negative degree");
    if (alter_count() > degree) {
      throw std::invalid_argument("more detailed alters than reported degree");
    }
  }
};

struct SamplingDesign {
  long long sample_size = 0;  // SRSWOR draw from the frame
  // Optional respondent-level nonresponse: groups not listed respond with
  // probability 1.  Weights stay at N_F/n; post-stratification compensates.
  std::map<std::string, double> group_response_prob;

  void validate(long long frame_size) const {
    if (sample_size < 1 || sample_size > frame_size) {
      throw std::invalid_argument("sample size must be in [1, N_F]");
    }
    for (const auto& [g, p] : group_response_prob) {
      if (p <= 0.0 || p > 1.0) {
        throw std::invalid_argument("response probability must be in (0,1]: " + g);
      }
    }
  }
};

// Propensity of picking `alter` as a detailed alter of `respondent`;
// uniform selection is propensity 1 for everyone.
using AlterPropensity =
    std::function<double(const Population&, NodeId respondent, NodeId alter)>;

struct AlterSelectionModel {
  int max_alters = 3;
  AlterPropensity propensity;  // null means uniform

  static AlterSelectionModel uniform(int max_alters = 3) {
    return AlterSelectionModel{max_alters, nullptr};
  }

  // Same-group alters get `multiplier` times the base propensity.  When
  // `groups` is non-empty only respondents in those groups select
  // homophilously; everyone else selects uniformly.
  static AlterSelectionModel homophilous(int max_alters, double multiplier,
                                         std::vector<std::string> groups = {}) {
    auto marked = std::make_shared<std::vector<std::string>>(std::move(groups));
    AlterPropensity f = [multiplier, marked](const Population& pop,
                                             NodeId respondent, NodeId alter) {
      if (!marked->empty() &&
          std::find(marked->begin(), marked->end(), pop.group(respondent)) ==
              marked->end()) {
        return 1.0;
      }
      return pop.group(alter) == pop.group(respondent) ? multiplier : 1.0;
    };
    return AlterSelectionModel{max_alters, std::move(f)};
  }

  void validate() const {
    if (max_alters < 1) throw std::invalid_argument("max_alters must be >= 1");
  }
};

struct ReportingModel {
  double false_negative_hidden = 0.0;  // hidden alter reported as not hidden
  double false_positive_hidden = 0.0;  // non-hidden alter reported as hidden
  double false_negative_frame = 0.0;
  double false_positive_frame = 0.0;
  double awareness_prob = 1.0;  // alter aware of respondent's hidden status
  // Stress-test switch: reported degrees at or above the threshold are
  // rounded to the nearest multiple of 5.  Off by default.
  std::optional<int> degree_heaping_threshold;

  static ReportingModel accurate() { return ReportingModel{}; }

  void validate() const {
    for (double p : {false_negative_hidden, false_positive_hidden,
                     false_negative_frame, false_positive_frame,
                     awareness_prob}) {
      if (p < 0.0 || p > 1.0) {
        throw std::invalid_argument("reporting probability not in [0,1]");
      }
    }
  }
};

struct SampledRespondent {
  NodeId node;
  double design_weight;
};

// SRSWOR of design.sample_size frame nodes, each carrying weight N_F/n.
// With a response mechanism, sampled units respond independently with their
// group's probability and only respondents are returned.
inline std::vector<SampledRespondent> draw_sample(const Population& pop,
                                                  const SamplingDesign& design,
                                                  std::uint64_t seed) {
  design.validate(pop.frame_size());
  Rng rng(seed);
  const std::vector<NodeId> frame = pop.frame_nodes();
  const double weight = static_cast<double>(pop.frame_size()) /
                        static_cast<double>(design.sample_size);

  std::vector<NodeId> chosen;
  for (std::uint32_t idx : rng.sample_without_replacement(
           static_cast<std::uint32_t>(frame.size()),
           static_cast<std::uint32_t>(design.sample_size))) {
    chosen.push_back(frame[idx]);
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<SampledRespondent> out;
  out.reserve(chosen.size());
  for (NodeId node : chosen) {
    if (!design.group_response_prob.empty()) {
      auto it = design.group_response_prob.find(pop.group(node));
      const double p = it == design.group_response_prob.end() ? 1.0 : it->second;
      if (!rng.bernoulli(p)) continue;
    }
    out.push_back({node, weight});
  }
  return out;
}

namespace detail {

// Sequential draws without replacement, probability proportional to the
// remaining propensities.  Uniform propensities reduce to SRSWOR.
inline std::vector<NodeId> select_alters(const Population& pop, NodeId ego,
                                         const std::vector<NodeId>& neighbors,
                                         const AlterSelectionModel& model,
                                         Rng& rng) {
  const int r = std::min<int>(model.max_alters,
                              static_cast<int>(neighbors.size()));
  if (r == 0) return {};
  if (!model.propensity) {
    std::vector<NodeId> out;
    for (std::uint32_t idx : rng.sample_without_replacement(
             static_cast<std::uint32_t>(neighbors.size()),
             static_cast<std::uint32_t>(r))) {
      out.push_back(neighbors[idx]);
    }
    return out;
  }
  std::vector<double> weight(neighbors.size());
  double total = 0.0;
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    weight[k] = model.propensity(pop, ego, neighbors[k]);
    if (weight[k] <= 0.0) {
      throw std::invalid_argument("alter propensity must be positive");
    }
    total += weight[k];
  }
  std::vector<NodeId> out;
  std::vector<bool> taken(neighbors.size(), false);
  for (int draw = 0; draw < r; ++draw) {
    double u = rng.uniform() * total;
    std::size_t pick = neighbors.size();
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      if (taken[k]) continue;
      pick = k;  // last untaken entry absorbs rounding slack
      if (u < weight[k]) break;
      u -= weight[k];
    }
    taken[pick] = true;
    total -= weight[pick];
    out.push_back(neighbors[pick]);
  }
  return out;
}

inline int heaped_degree(int degree, const ReportingModel& reporting, int r) {
  if (!reporting.degree_heaping_threshold ||
      degree < *reporting.degree_heaping_threshold) {
    return degree;
  }
  const int rounded = static_cast<int>(5.0 * std::round(degree / 5.0));
  return std::max(rounded, r);
}

}  // namespace detail

// One interview: the respondent reports their true degree in the tie
// network, then answers detail questions about up to max_alters network
// members.  Flags pass through the reporting model independently.
inline RespondentRecord interview(const Population& pop, NodeId respondent,
                                  const AlterSelectionModel& alter_model,
                                  const ReportingModel& reporting,
                                  std::uint64_t seed) {
  if (!pop.in_frame(respondent)) {
    throw std::invalid_argument("respondent is not in the frame");
  }
  alter_model.validate();
  reporting.validate();
  Rng rng(seed);

  const std::vector<NodeId>& neighbors = pop.network().neighbors(respondent);
  const std::vector<NodeId> selected =
      detail::select_alters(pop, respondent, neighbors, alter_model, rng);

  RespondentRecord rec;
  rec.respondent_id = "n" + std::to_string(respondent);
  rec.group = pop.group(respondent);
  rec.design_weight = 1.0;
  for (NodeId alter : selected) {
    AlterReport report;
    report.reported_hidden = pop.in_hidden(alter)
                                 ? !rng.bernoulli(reporting.false_negative_hidden)
                                 : rng.bernoulli(reporting.false_positive_hidden);
    report.reported_frame = pop.in_frame(alter)
                                ? !rng.bernoulli(reporting.false_negative_frame)
                                : rng.bernoulli(reporting.false_positive_frame);
    report.group = pop.group(alter);
    report.reported_aware = rng.bernoulli(reporting.awareness_prob);
    rec.alters.push_back(std::move(report));
  }
  rec.degree = detail::heaped_degree(static_cast<int>(neighbors.size()),
                                     reporting, rec.alter_count());
  rec.validate();
  return rec;
}

// Full survey pass: sample, then interview every respondent.  Interview k
// uses the derived seed (seed, k+1), so records are reproducible and
// independent of evaluation order.
inline std::vector<RespondentRecord> run_survey(
    const Population& pop, const SamplingDesign& design,
    const AlterSelectionModel& alter_model, const ReportingModel& reporting,
    std::uint64_t seed) {
  const std::vector<SampledRespondent> sample =
      draw_sample(pop, design, derive_seed(seed, 0));
  std::vector<RespondentRecord> records;
  records.reserve(sample.size());
  for (std::size_t k = 0; k < sample.size(); ++k) {
    RespondentRecord rec = interview(pop, sample[k].node, alter_model,
                                     reporting, derive_seed(seed, k + 1));
    rec.design_weight = sample[k].design_weight;
    records.push_back(std::move(rec));
  }
  return records;
}

// Expected number of times the average hidden-population member would be
// reported as hidden in a census of the frame with full alter enumeration.
// Under accurate reporting this equals the mean frame-degree of the hidden
// set.
inline double true_visibility(const Population& pop,
                              const ReportingModel& reporting) {
  reporting.validate();
  if (pop.hidden_size() == 0) {
    throw std::invalid_argument("hidden population is empty");
  }
  const long long frame_to_hidden =
      total_degree_between(pop, frame_members(), hidden_members());
  return (1.0 - reporting.false_negative_hidden) *
         static_cast<double>(frame_to_hidden) /
         static_cast<double>(pop.hidden_size());
}

// Census with full alter enumeration and unit weights: the configuration
// under which the estimators are exact.
inline std::vector<RespondentRecord> census_with_full_reports(
    const Population& pop, const ReportingModel& reporting, std::uint64_t seed) {
  std::vector<RespondentRecord> records;
  const std::vector<NodeId> frame = pop.frame_nodes();
  AlterSelectionModel model = AlterSelectionModel::uniform(
      static_cast<int>(pop.node_count()));
  for (std::size_t k = 0; k < frame.size(); ++k) {
    records.push_back(
        interview(pop, frame[k], model, reporting, derive_seed(seed, k + 1)));
  }
  return records;
}

}  // namespace netreport
