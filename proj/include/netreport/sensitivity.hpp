#pragma once

// Sensitivity machinery: the three adjustment factors that tie the size
// estimator's expectation to the truth, plus exact bias formulas for
// imperfect respondent weights and non-uniform detailed-alter selection.
//
// Factor conventions.  eta_hidden and eta_frame are precisions: the fraction
// of hidden-status (resp. frame-status) claims that are true.  nu is the
// ratio of reporting-model visibilities, average correct in-reports per
// hidden member over average correct frame in-reports per frame member, so
// missed reports (false negatives) lower nu rather than the etas.  With all
// three factors at 1 the estimator targets the true hidden-population size;
// in general it targets (eta_frame / eta_hidden) * nu * N_H.

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

#include "netreport/population.hpp"
#include "netreport/rng.hpp"
#include "netreport/survey.hpp"

namespace netreport {

struct AdjustmentFactors {
  double eta_hidden = 1.0;  // in [0,1]
  double eta_frame = 1.0;   // in [0,1]
  double nu = 1.0;          // in [0,inf)
};

// Expected-value factors computed exactly from the population's connection
// counts and the reporting model's error rates.
inline AdjustmentFactors measure_factors(const Population& pop,
                                         const ReportingModel& reporting) {
  reporting.validate();
  const auto d = [&](const NodePredicate& src, const NodePredicate& dst) {
    return static_cast<double>(total_degree_between(pop, src, dst));
  };
  auto not_hidden = [](const Population& p, NodeId i) { return !p.in_hidden(i); };
  auto not_frame = [](const Population& p, NodeId i) { return !p.in_frame(i); };

  const double frame_hidden = d(frame_members(), hidden_members());
  const double frame_frame = d(frame_members(), frame_members());
  const double frame_outside_hidden = d(frame_members(), not_hidden);
  const double frame_outside_frame = d(frame_members(), not_frame);

  if (frame_hidden <= 0.0 || frame_frame <= 0.0) {
    throw std::invalid_argument(
        "population has no frame-hidden or frame-frame connections");
  }

  const double true_hidden_claims =
      (1.0 - reporting.false_negative_hidden) * frame_hidden;
  const double hidden_claims =
      true_hidden_claims +
      reporting.false_positive_hidden * frame_outside_hidden;
  const double true_frame_claims =
      (1.0 - reporting.false_negative_frame) * frame_frame;
  const double frame_claims =
      true_frame_claims + reporting.false_positive_frame * frame_outside_frame;

  AdjustmentFactors factors;
  factors.eta_hidden =
      hidden_claims > 0.0 ? true_hidden_claims / hidden_claims : 0.0;
  factors.eta_frame =
      frame_claims > 0.0 ? true_frame_claims / frame_claims : 0.0;

  const double hidden_visibility =
      true_hidden_claims / static_cast<double>(pop.hidden_size());
  const double frame_visibility =
      true_frame_claims / static_cast<double>(pop.frame_size());
  if (frame_visibility <= 0.0) {
    throw std::invalid_argument("frame visibility is zero");
  }
  factors.nu = hidden_visibility / frame_visibility;
  return factors;
}

// Same factors measured by simulating full-report censuses and averaging the
// realized claim counts; cross-validates the analytic path.
inline AdjustmentFactors measure_factors_empirical(const Population& pop,
                                                   const ReportingModel& reporting,
                                                   std::uint64_t seed,
                                                   int replicates = 20) {
  reporting.validate();
  if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
  double hidden_claims = 0.0, true_hidden_claims = 0.0;
  double frame_claims = 0.0, true_frame_claims = 0.0;
  for (int rep = 0; rep < replicates; ++rep) {
    Rng rng(derive_seed(seed, rep));
    for (NodeId i : pop.frame_nodes()) {
      for (NodeId j : pop.network().neighbors(i)) {
        const bool claim_hidden =
            pop.in_hidden(j) ? !rng.bernoulli(reporting.false_negative_hidden)
                             : rng.bernoulli(reporting.false_positive_hidden);
        const bool claim_frame =
            pop.in_frame(j) ? !rng.bernoulli(reporting.false_negative_frame)
                            : rng.bernoulli(reporting.false_positive_frame);
        hidden_claims += claim_hidden;
        true_hidden_claims += claim_hidden && pop.in_hidden(j);
        frame_claims += claim_frame;
        true_frame_claims += claim_frame && pop.in_frame(j);
      }
    }
  }
  if (hidden_claims <= 0.0 || frame_claims <= 0.0 || true_frame_claims <= 0.0) {
    throw std::invalid_argument("no reports generated; factors undefined");
  }
  AdjustmentFactors factors;
  factors.eta_hidden = true_hidden_claims / hidden_claims;
  factors.eta_frame = true_frame_claims / frame_claims;
  factors.nu = (true_hidden_claims / static_cast<double>(pop.hidden_size())) /
               (true_frame_claims / static_cast<double>(pop.frame_size()));
  return factors;
}

// What the size estimator converges to when the factors differ from 1.
inline double predict_estimand(double nh_true, const AdjustmentFactors& f) {
  if (f.eta_hidden <= 0.0) {
    throw std::invalid_argument(
        "fully masked population: eta_hidden must be positive");
  }
  return (f.eta_frame / f.eta_hidden) * f.nu * nh_true;
}

// Exact bias of the expanded report total when respondent-level weights are
// off by factors epsilon_i = w'_i / w_i:
//   N_F * [ ybar * (mean(eps) - 1) + cov(y_i, eps_i) ]
// with population (divisor N) covariance over the frame.
inline double imperfect_weight_bias(const Population& pop,
                                    const NodePredicate& trait,
                                    const std::map<NodeId, double>& epsilon) {
  const std::vector<NodeId> frame = pop.frame_nodes();
  const double n = static_cast<double>(frame.size());
  double y_mean = 0.0, e_mean = 0.0;
  std::vector<double> ys, es;
  ys.reserve(frame.size());
  es.reserve(frame.size());
  for (NodeId i : frame) {
    auto it = epsilon.find(i);
    if (it == epsilon.end() || it->second <= 0.0) {
      throw std::invalid_argument(
          "every frame node needs a positive weight-error factor");
    }
    ys.push_back(static_cast<double>(degree_between(pop, i, trait)));
    es.push_back(it->second);
    y_mean += ys.back();
    e_mean += es.back();
  }
  y_mean /= n;
  e_mean /= n;
  double cov = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k) {
    cov += (ys[k] - y_mean) * (es[k] - e_mean);
  }
  cov /= n;
  return n * (y_mean * (e_mean - 1.0) + cov);
}

// Exact inclusion probabilities for sequential propensity-weighted draws
// without replacement: probability each unit appears among the first
// `draws` selections.  Enumerates ordered selection paths, so it is meant
// for the small configurations used in bias analysis.
inline std::vector<double> alter_inclusion_probabilities(
    const std::vector<double>& propensities, int draws) {
  const std::size_t n = propensities.size();
  if (n > 30) {
    throw std::invalid_argument(
        "exact inclusion probabilities limited to 30 alters");
  }
  for (double p : propensities) {
    if (p <= 0.0) {
      throw std::invalid_argument("alter propensity must be positive");
    }
  }
  if (draws >= static_cast<int>(n)) {
    return std::vector<double>(n, 1.0);
  }
  std::vector<double> inclusion(n, 0.0);
  double total = 0.0;
  for (double p : propensities) total += p;

  // Walk every ordered selection prefix; adding the path probability at the
  // step where a unit is chosen sums to its inclusion probability.
  auto walk = [&](auto&& self, std::uint32_t chosen_mask, double path_prob,
                  double remaining, int depth) -> void {
    for (std::size_t j = 0; j < n; ++j) {
      if (chosen_mask & (1u << j)) continue;
      const double q = path_prob * propensities[j] / remaining;
      inclusion[j] += q;
      if (depth + 1 < draws) {
        self(self, chosen_mask | (1u << j), q, remaining - propensities[j],
             depth + 1);
      }
    }
  };
  walk(walk, 0u, 1.0, total, 0);
  return inclusion;
}

struct AlterBiasDecomposition {
  double total = 0.0;              // sum over reports of z_ij (eps_ij - 1)
  double weight_level = 0.0;       // aggregate error in the subsample weights
  double degree_covariance = 0.0;  // network size vs weight-error relationship
  double trait_covariance = 0.0;   // weight errors vs alter-trait relationship
};

// Exact bias of the expanded report total for trait Z when detailed alters
// are selected with the given model instead of uniformly, with the used
// weight d/r against the true weight 1/pi.  The three components sum to the
// total identically.
inline AlterBiasDecomposition alter_selection_bias(const Population& pop,
                                                   const AlterSelectionModel& model,
                                                   const NodePredicate& trait) {
  model.validate();
  const std::vector<NodeId> frame = pop.frame_nodes();
  const double n_frame = static_cast<double>(frame.size());

  std::vector<double> z_total(frame.size(), 0.0);     // z_i
  std::vector<double> degree(frame.size(), 0.0);      // y_i = d_i
  std::vector<double> eps_mean(frame.size(), 1.0);    // mean_j eps_ij
  std::vector<double> zeps_cov(frame.size(), 0.0);    // cov_j(z_ij, eps_ij)

  AlterBiasDecomposition out;
  for (std::size_t idx = 0; idx < frame.size(); ++idx) {
    const NodeId i = frame[idx];
    const auto& neighbors = pop.network().neighbors(i);
    const int d = static_cast<int>(neighbors.size());
    degree[idx] = d;
    if (d == 0) continue;
    const int r = std::min(model.max_alters, d);

    std::vector<double> propensities(neighbors.size(), 1.0);
    if (model.propensity) {
      for (std::size_t k = 0; k < neighbors.size(); ++k) {
        propensities[k] = model.propensity(pop, i, neighbors[k]);
      }
    }
    std::vector<double> pi;
    if (!model.propensity) {
      pi.assign(neighbors.size(), static_cast<double>(r) / d);
    } else {
      pi = alter_inclusion_probabilities(propensities, r);
    }

    double z_sum = 0.0, eps_sum = 0.0, zeps_sum = 0.0;
    const double used_weight = static_cast<double>(d) / r;
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      const double z = trait(pop, neighbors[k]) ? 1.0 : 0.0;
      const double eps = used_weight * pi[k];
      out.total += z * (eps - 1.0);
      z_sum += z;
      eps_sum += eps;
      zeps_sum += z * eps;
    }
    z_total[idx] = z_sum;
    eps_mean[idx] = eps_sum / d;
    zeps_cov[idx] = zeps_sum / d - (z_sum / d) * (eps_sum / d);
  }

  double z_bar = 0.0, eps_bar = 0.0, deg_bar = 0.0, cov_bar = 0.0;
  for (std::size_t idx = 0; idx < frame.size(); ++idx) {
    z_bar += z_total[idx];
    eps_bar += eps_mean[idx];
    deg_bar += degree[idx];
    cov_bar += zeps_cov[idx];
  }
  z_bar /= n_frame;
  eps_bar /= n_frame;
  deg_bar /= n_frame;
  cov_bar /= n_frame;

  double cov_degree_sigma = 0.0, cov_z_eps = 0.0;
  for (std::size_t idx = 0; idx < frame.size(); ++idx) {
    cov_degree_sigma += (degree[idx] - deg_bar) * (zeps_cov[idx] - cov_bar);
    cov_z_eps += (z_total[idx] - z_bar) * (eps_mean[idx] - eps_bar);
  }
  cov_degree_sigma /= n_frame;
  cov_z_eps /= n_frame;

  const double trait_total = z_bar * n_frame;  // y_{F,Z}
  out.weight_level = trait_total * (eps_bar - 1.0);
  out.degree_covariance = n_frame * (cov_bar * deg_bar + cov_degree_sigma);
  out.trait_covariance = n_frame * cov_z_eps;
  return out;
}

}  // namespace netreport
