#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <utility>

#include "fixtures.hpp"
#include "netreport/population.hpp"
#include "netreport/survey.hpp"

using namespace netreport;
using netreport::testing::six_node_population;

namespace {

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
}

double standard_error(const std::vector<double>& xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (xs.size() - 1) / xs.size());
}

}  // namespace

TEST_CASE("complete graph when the edge probability is 1") {
  const auto pop = generate_er(5, 2, 1.0, 42);
  for (NodeId i = 0; i < 5; ++i) {
    REQUIRE(pop.network().degree(i) == 4);
    const int frame_links = degree_between(pop, i, frame_members());
    REQUIRE(frame_links == (pop.in_frame(i) ? 1 : 2));
  }
  REQUIRE(pop.network().edge_count() == 10);
}

TEST_CASE("edgeless network when the edge probability is 0") {
  const auto pop = generate_er(100, 50, 0.0, 42);
  REQUIRE(pop.network().edge_count() == 0);
  REQUIRE(mean_degree_between(pop, frame_members(), frame_members()) == 0.0);
  // Isolated nodes have no connections to any target set.
  REQUIRE(degree_between(pop, 0, frame_members()) == 0);
  REQUIRE(degree_between(pop, 0, everyone()) == 0);
}

TEST_CASE("every node pair is hit at its nominal probability") {
  // Exercises the geometric-skip edge sampler and its triangle decoding:
  // each of the 15 pairs of a 6-node set must appear with frequency p.
  const int reps = 30000;
  const double p = 0.35;
  std::map<std::pair<NodeId, NodeId>, int> counts;
  for (int rep = 0; rep < reps; ++rep) {
    const auto pop = generate_er(6, 1, p, 500000 + rep);
    for (const auto& edge : pop.network().sorted_edges()) counts[edge] += 1;
  }
  REQUIRE(counts.size() == 15);
  double chi2 = 0.0;
  for (const auto& [edge, count] : counts) {
    const double expected = reps * p;
    chi2 += (count - expected) * (count - expected) / (expected * (1.0 - p));
  }
  // 99.9th percentile of chi-squared with 15 degrees of freedom.
  REQUIRE(chi2 < 37.7);
}

TEST_CASE("cross-block pairs are hit at their nominal probability") {
  const int reps = 30000;
  const double phi = 1.0;
  const double sigma = 0.3;
  std::map<std::pair<NodeId, NodeId>, int> counts;
  for (int rep = 0; rep < reps; ++rep) {
    const auto pop = generate_block(BlockModelSpec{phi, sigma, 3, 3},
                                    700000 + rep);
    for (const auto& [u, v] : pop.network().sorted_edges()) {
      if (u < 3 && v >= 3) counts[{u, v}] += 1;
    }
  }
  REQUIRE(counts.size() == 9);
  double chi2 = 0.0;
  for (const auto& [edge, count] : counts) {
    const double expected = reps * sigma;
    chi2 += (count - expected) * (count - expected) /
            (expected * (1.0 - sigma));
  }
  // 99.9th percentile of chi-squared with 9 degrees of freedom.
  REQUIRE(chi2 < 27.9);
}

TEST_CASE("generator rejects invalid arguments") {
  REQUIRE_THROWS_AS(generate_er(10, 11, 0.5, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(generate_er(10, 5, 1.5, 1), std::invalid_argument);
  REQUIRE_THROWS_AS(generate_er(10, 5, -0.1, 1), std::invalid_argument);
}

TEST_CASE("mean frame degree matches its expectation under homogeneous mixing") {
  // E[mean frame degree of frame members] = (N_F - 1) p.
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto pop = generate_er(2000, 400, 0.01, 1000 + seed);
    values.push_back(mean_degree_between(pop, frame_members(), frame_members()));
  }
  const double expected = 399 * 0.01;
  REQUIRE(std::abs(mean(values) - expected) < 0.02 * expected);
  REQUIRE(std::abs(mean(values) - expected) < 3.0 * standard_error(values));
}

TEST_CASE("block model with full attenuation severs the blocks") {
  const auto pop =
      generate_block(BlockModelSpec{1.0, 0.0, 30, 20}, 7);
  REQUIRE(mean_degree_between(pop, hidden_only_members(), frame_members()) ==
          0.0);
  // Two cliques.
  REQUIRE(pop.network().edge_count() == 30 * 29 / 2 + 20 * 19 / 2);
}

TEST_CASE("block model without attenuation mixes homogeneously") {
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto pop =
        generate_block(BlockModelSpec{0.05, 1.0, 300, 300}, 40 + seed);
    ratios.push_back(
        mean_degree_between(pop, hidden_members(), frame_members()) /
        mean_degree_between(pop, frame_members(), frame_members()));
  }
  REQUIRE(std::abs(mean(ratios) - 1.0) < 3.0 * standard_error(ratios) + 0.01);
}

TEST_CASE("block model degree ratio follows the mixing attenuation") {
  // With half the hidden set on the frame and attenuation 0.5 the ratio of
  // hidden-to-frame vs frame-to-frame mean degrees approaches 0.75.
  std::vector<double> ratios;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto pop =
        generate_block(BlockModelSpec{0.02, 0.5, 500, 500}, 900 + seed);
    ratios.push_back(
        mean_degree_between(pop, hidden_members(), frame_members()) /
        mean_degree_between(pop, frame_members(), frame_members()));
  }
  REQUIRE(std::abs(mean(ratios) - 0.75) < 0.03 * 0.75);
}

TEST_CASE("single-component mixture equals the plain generator") {
  const auto a = generate_mixture(MixtureSpec{{{500, 200, 0.02}}}, 99);
  const auto b = generate_er(500, 200, 0.02, 99);
  REQUIRE(a.network().sorted_edges() == b.network().sorted_edges());
  REQUIRE(a.frame_nodes() == b.frame_nodes());
}

TEST_CASE("mixture components with zero edge probability stay edgeless") {
  const auto pop =
      generate_mixture(MixtureSpec{{{100, 40, 0.0}, {50, 10, 0.0}}}, 5);
  REQUIRE(pop.network().edge_count() == 0);
}

TEST_CASE("mixture components never share edges") {
  const auto pop =
      generate_mixture(MixtureSpec{{{60, 20, 0.5}, {40, 10, 0.5}}}, 17);
  for (const auto& [u, v] : pop.network().sorted_edges()) {
    REQUIRE(((u < 60 && v < 60) || (u >= 60 && v >= 60)));
  }
}

TEST_CASE("non-interacting mixture keeps the two mean degrees aligned") {
  // Components differ in size and density but keep the same frame share;
  // that share condition makes the partition weights on both sides of the
  // comparison coincide, and the two mean degrees agree in expectation.
  std::vector<double> gaps;
  std::vector<double> denominators;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto pop = generate_mixture(
        MixtureSpec{{{1200, 360, 0.04}, {800, 240, 0.008}}}, 4000 + seed);
    const double hf = mean_degree_between(pop, hidden_members(), frame_members());
    const double ff = mean_degree_between(pop, frame_members(), frame_members());
    gaps.push_back(hf - ff);
    denominators.push_back(ff);
  }
  REQUIRE(std::abs(mean(gaps)) / mean(denominators) < 0.03);
}

TEST_CASE("mixture components with unequal frame shares break the alignment") {
  // With frame shares 0.6 and 0.2 the two partition weightings differ and
  // the identity genuinely fails: the hidden side averages 8 connections,
  // the frame side 10.
  std::vector<double> hf, ff;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto pop = generate_mixture(
        MixtureSpec{{{1000, 600, 0.02}, {1000, 200, 0.02}}}, 8200 + seed);
    hf.push_back(mean_degree_between(pop, hidden_members(), frame_members()));
    ff.push_back(mean_degree_between(pop, frame_members(), frame_members()));
  }
  REQUIRE_THAT(mean(hf), Catch::Matchers::WithinRel(8.0, 0.03));
  REQUIRE_THAT(mean(ff), Catch::Matchers::WithinRel(10.0, 0.03));
}

TEST_CASE("connection counts on the six-node fixture") {
  const auto pop = six_node_population();
  REQUIRE(degree_between(pop, 1, frame_members()) == 1);
  REQUIRE(degree_between(pop, 2, frame_members()) == 1);
  REQUIRE(degree_between(pop, 0, frame_members()) == 1);
  REQUIRE_THROWS_AS(degree_between(pop, 17, frame_members()), std::out_of_range);

  REQUIRE(mean_degree_between(pop, hidden_members(), frame_members()) == 1.0);
  REQUIRE(mean_degree_between(pop, frame_members(), frame_members()) == 1.0);
}

TEST_CASE("mean degree over an empty source set is an error") {
  const auto pop = six_node_population();
  auto nobody = [](const Population&, NodeId) { return false; };
  REQUIRE_THROWS_AS(mean_degree_between(pop, nobody, frame_members()),
                    std::invalid_argument);
}

TEST_CASE("directed connection totals are symmetric") {
  const auto pop = generate_er(200, 80, 0.05, 3);
  REQUIRE(total_degree_between(pop, frame_members(), hidden_only_members()) ==
          total_degree_between(pop, hidden_only_members(), frame_members()));
  REQUIRE(total_degree_between(pop, frame_members(), hidden_members()) ==
          total_degree_between(pop, hidden_members(), frame_members()));
}

TEST_CASE("partitioning the source set decomposes the mean degree") {
  // For any partition A = A1 u A2:
  //   dbar_{A,B} = |A1|/|A| dbar_{A1,B} + |A2|/|A| dbar_{A2,B}.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pop = generate_er(50, 20, 0.2, 600 + seed);
    auto a1 = [](const Population& p, NodeId i) {
      return p.in_hidden(i) && i % 2 == 0;
    };
    auto a2 = [](const Population& p, NodeId i) {
      return p.in_hidden(i) && i % 2 == 1;
    };
    long long n1 = 0, n2 = 0;
    for (NodeId i = 0; i < static_cast<NodeId>(pop.node_count()); ++i) {
      n1 += a1(pop, i);
      n2 += a2(pop, i);
    }
    const double whole = mean_degree_between(pop, hidden_members(), frame_members());
    const double p1 = static_cast<double>(n1) / (n1 + n2);
    const double p2 = static_cast<double>(n2) / (n1 + n2);
    const double split = p1 * mean_degree_between(pop, a1, frame_members()) +
                         p2 * mean_degree_between(pop, a2, frame_members());
    REQUIRE_THAT(whole, Catch::Matchers::WithinAbs(split, 1e-12));
  }
}

TEST_CASE("partitioning the target set splits the mean degree additively") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto pop = generate_er(50, 20, 0.2, 700 + seed);
    const double whole = mean_degree_between(pop, frame_members(), hidden_members());
    const double split =
        mean_degree_between(pop, frame_members(), frame_members()) +
        mean_degree_between(pop, frame_members(), hidden_only_members());
    REQUIRE_THAT(whole, Catch::Matchers::WithinAbs(split, 1e-12));
  }
}

TEST_CASE("visibility equals the mean frame degree under accurate reporting") {
  const auto pop = six_node_population();
  REQUIRE(true_visibility(pop, ReportingModel::accurate()) == 1.0);
}

TEST_CASE("visibility vanishes when every report is missed") {
  const auto pop = six_node_population();
  ReportingModel blind;
  blind.false_negative_hidden = 1.0;
  REQUIRE(true_visibility(pop, blind) == 0.0);
}

TEST_CASE("visibility of an edgeless population is zero") {
  const auto pop = generate_er(40, 10, 0.0, 2);
  REQUIRE(true_visibility(pop, ReportingModel::accurate()) == 0.0);
}

TEST_CASE("group labels cover the configured cells") {
  const auto pop = generate_er(5000, 100, 0.0, 8);
  std::set<std::string> seen;
  for (NodeId i = 0; i < 5000; ++i) seen.insert(pop.group(i));
  REQUIRE(seen.size() == 12);
}

TEST_CASE("population generation is reproducible by seed") {
  const auto a = generate_er(300, 100, 0.03, 123);
  const auto b = generate_er(300, 100, 0.03, 123);
  REQUIRE(a.network().sorted_edges() == b.network().sorted_edges());
  REQUIRE(a.frame_nodes() == b.frame_nodes());
  const auto c = generate_er(300, 100, 0.03, 124);
  REQUIRE(a.network().sorted_edges() != c.network().sorted_edges());
}

TEST_CASE("population invariants are enforced") {
  UndirectedNetwork net(2);
  REQUIRE_THROWS_AS(net.add_edge(0, 0), std::invalid_argument);
  // Frame member outside the hidden set.
  UndirectedNetwork net2(2);
  REQUIRE_THROWS_AS(Population({true, false}, {false, true}, {"g", "g"},
                               std::move(net2)),
                    std::invalid_argument);
}
