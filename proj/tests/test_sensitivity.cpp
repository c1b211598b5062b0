#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numeric>

#include "fixtures.hpp"
#include "netreport/estimators.hpp"
#include "netreport/sensitivity.hpp"
#include "netreport/survey.hpp"

using namespace netreport;
using netreport::testing::six_node_population;

namespace {

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

// Independent oracle: expectation of the expanded trait total under the
// selection model, by direct enumeration of ordered selection sequences.
double enumerate_expected_total(const Population& pop,
                                const AlterSelectionModel& model,
                                const NodePredicate& trait) {
  double expected = 0.0;
  for (NodeId i : pop.frame_nodes()) {
    const auto& neighbors = pop.network().neighbors(i);
    const int d = static_cast<int>(neighbors.size());
    if (d == 0) continue;
    const int r = std::min(model.max_alters, d);
    std::vector<double> propensity(neighbors.size(), 1.0);
    if (model.propensity) {
      for (std::size_t k = 0; k < neighbors.size(); ++k) {
        propensity[k] = model.propensity(pop, i, neighbors[k]);
      }
    }
    double node_expectation = 0.0;
    auto walk = [&](auto&& self, std::uint32_t mask, double prob, double left,
                    int depth, int trait_count) -> void {
      if (depth == r) {
        node_expectation +=
            prob * (static_cast<double>(d) / r) * trait_count;
        return;
      }
      for (std::size_t k = 0; k < neighbors.size(); ++k) {
        if (mask & (1u << k)) continue;
        self(self, mask | (1u << k), prob * propensity[k] / left,
             left - propensity[k], depth + 1,
             trait_count + (trait(pop, neighbors[k]) ? 1 : 0));
      }
    };
    double total_propensity = 0.0;
    for (double p : propensity) total_propensity += p;
    walk(walk, 0u, 1.0, total_propensity, 0, 0);
    expected += node_expectation;
  }
  return expected;
}

double true_total(const Population& pop, const NodePredicate& trait) {
  double total = 0.0;
  for (NodeId i : pop.frame_nodes()) {
    total += degree_between(pop, i, trait);
  }
  return total;
}

}  // namespace

TEST_CASE("ideal conditions measure as unit factors") {
  const auto pop = generate_er(1000, 400, 0.02, 61);
  const auto f = measure_factors(pop, ReportingModel::accurate());
  REQUIRE(f.eta_hidden == 1.0);
  REQUIRE(f.eta_frame == 1.0);
  REQUIRE_THAT(f.nu, Catch::Matchers::WithinAbs(1.0, 0.05));
}

TEST_CASE("missed hidden reports scale the visibility ratio down") {
  const auto pop = generate_er(1000, 400, 0.02, 61);
  ReportingModel lossy;
  lossy.false_negative_hidden = 0.2;
  const auto accurate = measure_factors(pop, ReportingModel::accurate());
  const auto f = measure_factors(pop, lossy);
  // No false claims are possible, so the precision factors stay at 1 and the
  // 20% report loss lands entirely in the visibility ratio.
  REQUIRE(f.eta_hidden == 1.0);
  REQUIRE(f.eta_frame == 1.0);
  REQUIRE_THAT(f.nu / accurate.nu, Catch::Matchers::WithinRel(0.8, 1e-12));
}

TEST_CASE("false hidden claims lower the hidden precision factor") {
  // Node 5 of the fixture sits outside the hidden set but next to frame
  // node 2, so positive misreports have one connection to act on:
  // eta_hidden = 5 / (5 + 0.5 * 1).
  const auto pop = six_node_population();
  ReportingModel overeager;
  overeager.false_positive_hidden = 0.5;
  const auto f = measure_factors(pop, overeager);
  REQUIRE_THAT(f.eta_hidden, Catch::Matchers::WithinRel(10.0 / 11.0, 1e-12));
  REQUIRE(f.eta_frame == 1.0);
}

TEST_CASE("frame misreports move the frame precision factor") {
  const auto pop = six_node_population();
  ReportingModel sloppy;
  sloppy.false_positive_frame = 0.25;
  // True frame claims 2 (nodes 1 and 2 reporting each other); candidates for
  // false claims are the 4 non-frame alters of frame nodes.
  const auto f = measure_factors(pop, sloppy);
  REQUIRE_THAT(f.eta_frame,
               Catch::Matchers::WithinRel(2.0 / (2.0 + 0.25 * 4.0), 1e-12));
}

TEST_CASE("empirical factor measurement agrees with the analytic path") {
  const auto pop = generate_er(800, 300, 0.02, 67);
  ReportingModel lossy;
  lossy.false_negative_hidden = 0.3;
  lossy.false_negative_frame = 0.1;
  const auto analytic = measure_factors(pop, lossy);
  const auto empirical = measure_factors_empirical(pop, lossy, 68, 40);
  REQUIRE_THAT(empirical.eta_hidden,
               Catch::Matchers::WithinAbs(analytic.eta_hidden, 0.02));
  REQUIRE_THAT(empirical.eta_frame,
               Catch::Matchers::WithinAbs(analytic.eta_frame, 0.02));
  REQUIRE_THAT(empirical.nu, Catch::Matchers::WithinAbs(analytic.nu, 0.05));
}

TEST_CASE("attenuated cross-block mixing shifts the visibility ratio") {
  // Half the hidden set on the frame with attenuation 0.5: the visibility
  // ratio approaches 0.5 + 0.5 * 0.5 = 0.75.
  std::vector<double> nus;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto pop =
        generate_block(BlockModelSpec{0.02, 0.5, 500, 500}, 700 + seed);
    nus.push_back(measure_factors(pop, ReportingModel::accurate()).nu);
  }
  REQUIRE(std::abs(mean(nus) - 0.75) < 0.03 * 0.75);
}

TEST_CASE("estimand prediction arithmetic") {
  REQUIRE(predict_estimand(1000, AdjustmentFactors{1, 1, 1}) == 1000.0);
  REQUIRE_THAT(predict_estimand(1000, AdjustmentFactors{0.6, 0.9, 1.0}),
               Catch::Matchers::WithinRel(1500.0, 1e-12));
  REQUIRE_THROWS_AS(predict_estimand(1000, AdjustmentFactors{0.0, 1.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("the estimator tracks the predicted estimand under attenuated mixing") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const auto pop =
        generate_block(BlockModelSpec{0.03, 0.5, 1000, 1000}, 900 + seed);
    const auto factors = measure_factors(pop, ReportingModel::accurate());
    const double predicted = predict_estimand(2000, factors);
    const auto records = run_survey(pop, SamplingDesign{300, {}},
                                    AlterSelectionModel::uniform(3),
                                    ReportingModel::accurate(), 1900 + seed);
    const auto margins = FrameMargins::from_population(pop);
    const auto w = poststratify(records, margins);
    ratios.push_back(hidden_population_size(records, w.calibrated) / predicted);
  }
  REQUIRE(std::abs(mean(ratios) - 1.0) < 0.03);
}

TEST_CASE("partitioning the hidden set relates the two mean-degree gaps exactly") {
  // dbar_HF - dbar_FF = (1 - N_F/N_H) * (dbar_{H-F,F} - dbar_FF) on any
  // population, so whenever the left side vanishes the off-frame mean degree
  // matches the frame one too.
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto pop = generate_mixture(
        MixtureSpec{{{300, 90, 0.05}, {200, 60, 0.02}}}, 2600 + seed);
    const double hf = mean_degree_between(pop, hidden_members(), frame_members());
    const double ff = mean_degree_between(pop, frame_members(), frame_members());
    const double of = mean_degree_between(pop, hidden_only_members(), frame_members());
    const double share = static_cast<double>(pop.frame_size()) /
                         static_cast<double>(pop.hidden_size());
    REQUIRE_THAT(hf - ff,
                 Catch::Matchers::WithinAbs((1.0 - share) * (of - ff), 1e-10));
  }
}

TEST_CASE("exact weight-error bias vanishes for perfect weights") {
  const auto pop = generate_er(50, 20, 0.2, 71);
  std::map<NodeId, double> epsilon;
  for (NodeId i : pop.frame_nodes()) epsilon[i] = 1.0;
  REQUIRE(imperfect_weight_bias(pop, hidden_members(), epsilon) == 0.0);
}

TEST_CASE("constant weight errors bias by the aggregate factor only") {
  const auto pop = generate_er(50, 20, 0.2, 71);
  std::map<NodeId, double> epsilon;
  for (NodeId i : pop.frame_nodes()) epsilon[i] = 1.3;
  const double y_total = true_total(pop, hidden_members());
  REQUIRE_THAT(imperfect_weight_bias(pop, hidden_members(), epsilon),
               Catch::Matchers::WithinRel(y_total * 0.3, 1e-9));
}

TEST_CASE("weight-error bias matches brute-force design enumeration") {
  // 12 frame nodes, SRSWOR of 4: enumerate all 495 samples exactly.
  const auto pop = generate_er(12, 12, 0.35, 73);
  std::map<NodeId, double> epsilon;
  std::vector<double> eps_by_index;
  for (NodeId i : pop.frame_nodes()) {
    // Correlate the error with the node's connectivity.
    const double e = 0.7 + 0.1 * degree_between(pop, i, hidden_members());
    epsilon[i] = e;
    eps_by_index.push_back(e);
  }
  const int n = 4, N = 12;
  const double w_design = static_cast<double>(N) / n;
  double expectation = 0.0;
  long long samples = 0;
  std::vector<int> pick(n);
  auto walk = [&](auto&& self, int start, int depth, double acc) -> void {
    if (depth == n) {
      expectation += acc;
      ++samples;
      return;
    }
    for (int i = start; i < N; ++i) {
      self(self, i + 1, depth + 1,
           acc + eps_by_index[i] * w_design *
                     degree_between(pop, i, hidden_members()));
    }
  };
  walk(walk, 0, 0, 0.0);
  expectation /= static_cast<double>(samples);
  const double brute_force_bias = expectation - true_total(pop, hidden_members());
  REQUIRE_THAT(imperfect_weight_bias(pop, hidden_members(), epsilon),
               Catch::Matchers::WithinAbs(brute_force_bias, 1e-9));
}

TEST_CASE("weight-error factors must be positive everywhere") {
  const auto pop = generate_er(10, 5, 0.3, 74);
  std::map<NodeId, double> epsilon;
  REQUIRE_THROWS_AS(imperfect_weight_bias(pop, hidden_members(), epsilon),
                    std::invalid_argument);
}

TEST_CASE("uniform selection gives unit inclusion weights") {
  const auto probs = alter_inclusion_probabilities({1.0, 1.0, 1.0, 1.0, 1.0}, 2);
  for (double p : probs) {
    REQUIRE_THAT(p, Catch::Matchers::WithinRel(0.4, 1e-12));
  }
  const auto all = alter_inclusion_probabilities({2.0, 5.0}, 3);
  REQUIRE(all == std::vector<double>{1.0, 1.0});
  REQUIRE_THROWS_AS(alter_inclusion_probabilities({1.0, 0.0}, 1),
                    std::invalid_argument);
}

TEST_CASE("inclusion probabilities sum to the number of draws") {
  const auto probs =
      alter_inclusion_probabilities({0.5, 1.0, 2.0, 4.0, 1.5, 3.0}, 3);
  REQUIRE_THAT(std::accumulate(probs.begin(), probs.end(), 0.0),
               Catch::Matchers::WithinRel(3.0, 1e-9));
}

TEST_CASE("the selection sampler realizes the exact inclusion probabilities") {
  // Star with six leaves in three propensity classes.
  UndirectedNetwork net(7);
  for (int k = 1; k <= 6; ++k) net.add_edge(0, k);
  net.finalize();
  std::vector<bool> frame(7, false);
  frame[0] = true;
  std::vector<std::string> groups = {"ego", "l1", "l2", "l3", "l4", "l5", "l6"};
  const Population pop(std::move(frame), std::vector<bool>(7, true),
                       std::move(groups), std::move(net));
  AlterSelectionModel model;
  model.max_alters = 2;
  model.propensity = [](const Population&, NodeId, NodeId alter) {
    return 1.0 + static_cast<double>(alter % 3);
  };
  std::vector<double> propensities;
  for (NodeId k = 1; k <= 6; ++k) {
    propensities.push_back(1.0 + static_cast<double>(k % 3));
  }
  const auto exact = alter_inclusion_probabilities(propensities, 2);

  std::map<std::string, int> counts;
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    const auto rec = interview(pop, 0, model, ReportingModel::accurate(), t);
    for (const auto& a : rec.alters) counts[a.group] += 1;
  }
  for (int k = 1; k <= 6; ++k) {
    const double frequency =
        counts["l" + std::to_string(k)] / static_cast<double>(trials);
    REQUIRE_THAT(frequency, Catch::Matchers::WithinAbs(exact[k - 1], 0.015));
  }
}

TEST_CASE("uniform alter selection is free of selection bias") {
  const auto pop = generate_er(40, 18, 0.25, 79);
  const auto bias = alter_selection_bias(pop, AlterSelectionModel::uniform(3),
                                         frame_members());
  REQUIRE_THAT(bias.total, Catch::Matchers::WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(bias.weight_level, Catch::Matchers::WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(bias.degree_covariance, Catch::Matchers::WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(bias.trait_covariance, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("an always-reportable trait is unbiased under any selection model") {
  const auto pop = generate_er(20, 8, 0.4, 83);
  const auto bias = alter_selection_bias(
      pop, AlterSelectionModel::homophilous(3, 5.0), hidden_members());
  REQUIRE_THAT(bias.total, Catch::Matchers::WithinAbs(0.0, 1e-9));
}

TEST_CASE("selection bias matches exhaustive enumeration on a 15-node fixture") {
  const auto pop = generate_er(15, 6, 0.4, 89, GroupModel{{"a", "b"}, {0.5, 0.5}});
  const auto model = AlterSelectionModel::homophilous(3, 3.0);
  const auto bias = alter_selection_bias(pop, model, frame_members());
  const double oracle = enumerate_expected_total(pop, model, frame_members()) -
                        true_total(pop, frame_members());
  REQUIRE_THAT(bias.total, Catch::Matchers::WithinAbs(oracle, 1e-9));
  REQUIRE(std::abs(bias.total) > 1e-6);  // the scenario is genuinely biased
}

TEST_CASE("bias decomposition components sum to the total") {
  int nontrivial = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const long long n = 6 + static_cast<long long>(seed % 7);
    const long long n_frame = 2 + static_cast<long long>(seed % 4);
    const auto pop = generate_er(n, n_frame, 0.45, 1300 + seed,
                                 GroupModel{{"a", "b", "c"}, {0.4, 0.4, 0.2}});
    AlterSelectionModel model;
    model.max_alters = 1 + static_cast<int>(seed % 3);
    model.propensity = [seed](const Population&, NodeId ego, NodeId alter) {
      // Arbitrary deterministic positive propensities.
      return 0.5 + ((alter * 2654435761u + seed * 40503u + ego) % 17) / 4.0;
    };
    auto trait = [](const Population& p, NodeId i) {
      return p.in_frame(i) || p.group(i) == "a";
    };
    const auto bias = alter_selection_bias(pop, model, trait);
    const double sum =
        bias.weight_level + bias.degree_covariance + bias.trait_covariance;
    REQUIRE_THAT(sum, Catch::Matchers::WithinAbs(
                          bias.total, 1e-9 * std::max(1.0, std::abs(bias.total))));
    if (std::abs(bias.total) > 1e-9) ++nontrivial;
  }
  REQUIRE(nontrivial > 50);
}

TEST_CASE("selection bias rejects unreachable zero-propensity alters") {
  const auto pop = six_node_population();
  AlterSelectionModel model;
  model.max_alters = 2;
  model.propensity = [](const Population&, NodeId, NodeId alter) {
    return alter == 0 ? 0.0 : 1.0;
  };
  REQUIRE_THROWS_AS(alter_selection_bias(pop, model, frame_members()),
                    std::invalid_argument);
}
