#pragma once

// Synthetic populations with known ground truth: a node set with frame and
// hidden membership flags, demographic group labels, and an undirected
// social network.  Everything downstream (survey simulation, estimator
// validation, sensitivity predictions) treats these objects as exact oracles.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "netreport/rng.hpp"

namespace netreport {

using NodeId = std::int32_t;

class UndirectedNetwork {
 public:
  UndirectedNetwork() = default;
  explicit UndirectedNetwork(std::size_t n_nodes) : adjacency_(n_nodes) {}

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edge_count_; }

  void add_edge(NodeId a, NodeId b) {
    check_node(a);
    check_node(b);
    if (a == b) throw std::invalid_argument("self-loops are not allowed");
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    ++edge_count_;
  }

  // Sorts neighbor lists and rejects duplicate edges; call once after bulk
  // insertion.
  void finalize() {
    for (auto& nbrs : adjacency_) {
      std::sort(nbrs.begin(), nbrs.end());
      if (std::adjacent_find(nbrs.begin(), nbrs.end()) != nbrs.end()) {
        throw std::invalid_argument("duplicate edge");
      }
    }
  }

  const std::vector<NodeId>& neighbors(NodeId i) const {
    check_node(i);
    return adjacency_[i];
  }

  int degree(NodeId i) const {
    return static_cast<int>(neighbors(i).size());
  }

  // Edges as (min, max) pairs in ascending order.
  std::vector<std::pair<NodeId, NodeId>> sorted_edges() const {
    std::vector<std::pair<NodeId, NodeId>> edges;
    edges.reserve(edge_count_);
    for (NodeId u = 0; u < static_cast<NodeId>(adjacency_.size()); ++u) {
      for (NodeId v : adjacency_[u]) {
        if (u < v) edges.emplace_back(u, v);
      }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
  }

 private:
  void check_node(NodeId i) const {
    if (i < 0 || static_cast<std::size_t>(i) >= adjacency_.size()) {
      throw std::out_of_range("unknown node id");
    }
  }

  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edge_count_ = 0;
};

class Population {
 public:
  Population(std::vector<bool> in_frame, std::vector<bool> in_hidden,
             std::vector<std::string> group_of, UndirectedNetwork network)
      : in_frame_(std::move(in_frame)),
        in_hidden_(std::move(in_hidden)),
        group_of_(std::move(group_of)),
        network_(std::move(network)) {
    const std::size_t n = network_.node_count();
    if (in_frame_.size() != n || in_hidden_.size() != n ||
        group_of_.size() != n) {
      throw std::invalid_argument("population attribute sizes disagree");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (in_frame_[i] && !in_hidden_[i]) {
        throw std::invalid_argument(
            "frame must be a subset of the hidden population");
      }
      if (group_of_[i].empty()) {
        throw std::invalid_argument("every node needs a group label");
      }
    }
    frame_size_ = std::count(in_frame_.begin(), in_frame_.end(), true);
    hidden_size_ = std::count(in_hidden_.begin(), in_hidden_.end(), true);
    if (frame_size_ < 1) throw std::invalid_argument("frame is empty");
  }

  std::size_t node_count() const { return network_.node_count(); }
  long long frame_size() const { return frame_size_; }
  long long hidden_size() const { return hidden_size_; }

  bool in_frame(NodeId i) const { return in_frame_.at(i); }
  bool in_hidden(NodeId i) const { return in_hidden_.at(i); }
  const std::string& group(NodeId i) const { return group_of_.at(i); }
  const UndirectedNetwork& network() const { return network_; }

  std::vector<NodeId> frame_nodes() const { return nodes_where(in_frame_); }
  std::vector<NodeId> hidden_nodes() const { return nodes_where(in_hidden_); }

  // Frame counts per group label, the margins a census would know.
  std::map<std::string, long long> frame_group_counts() const {
    std::map<std::string, long long> counts;
    for (NodeId i = 0; i < static_cast<NodeId>(node_count()); ++i) {
      if (in_frame_[i]) ++counts[group_of_[i]];
    }
    return counts;
  }

 private:
  std::vector<NodeId> nodes_where(const std::vector<bool>& flag) const {
    std::vector<NodeId> out;
    for (NodeId i = 0; i < static_cast<NodeId>(flag.size()); ++i) {
      if (flag[i]) out.push_back(i);
    }
    return out;
  }

  std::vector<bool> in_frame_;
  std::vector<bool> in_hidden_;
  std::vector<std::string> group_of_;
  UndirectedNetwork network_;
  long long frame_size_ = 0;
  long long hidden_size_ = 0;
};

using NodePredicate = std::function<bool(const Population&, NodeId)>;

inline NodePredicate frame_members() {
  return [](const Population& p, NodeId i) { return p.in_frame(i); };
}
inline NodePredicate hidden_members() {
  return [](const Population& p, NodeId i) { return p.in_hidden(i); };
}
inline NodePredicate hidden_only_members() {
  return [](const Population& p, NodeId i) {
    return p.in_hidden(i) && !p.in_frame(i);
  };
}
inline NodePredicate everyone() {
  return [](const Population&, NodeId) { return true; };
}

// Number of i's neighbors that satisfy `target`.
inline int degree_between(const Population& pop, NodeId i,
                          const NodePredicate& target) {
  int count = 0;
  for (NodeId j : pop.network().neighbors(i)) {
    if (target(pop, j)) ++count;
  }
  return count;
}

// Total connections from the nodes selected by `src` into `target`
// (each src node contributes its full neighbor count in target).
inline long long total_degree_between(const Population& pop,
                                      const NodePredicate& src,
                                      const NodePredicate& target) {
  long long total = 0;
  for (NodeId i = 0; i < static_cast<NodeId>(pop.node_count()); ++i) {
    if (src(pop, i)) total += degree_between(pop, i, target);
  }
  return total;
}

inline double mean_degree_between(const Population& pop,
                                  const NodePredicate& src,
                                  const NodePredicate& target) {
  long long n_src = 0;
  long long total = 0;
  for (NodeId i = 0; i < static_cast<NodeId>(pop.node_count()); ++i) {
    if (src(pop, i)) {
      ++n_src;
      total += degree_between(pop, i, target);
    }
  }
  if (n_src == 0) throw std::invalid_argument("mean over an empty node set");
  return static_cast<double>(total) / static_cast<double>(n_src);
}

// Group labels for generated populations: independent draws from a fixed
// categorical distribution.  The default is the twelve age-sex cells used
// throughout the survey instrument.
struct GroupModel {
  std::vector<std::string> labels;
  std::vector<double> probabilities;

  static GroupModel twelve_cells() {
    GroupModel g;
    for (const char* sex : {"f", "m"}) {
      for (const char* age :
           {"18_24", "25_34", "35_44", "45_54", "55_64", "65p"}) {
        g.labels.push_back(std::string(sex) + "_" + age);
      }
    }
    g.probabilities.assign(g.labels.size(), 1.0 / g.labels.size());
    return g;
  }

  static GroupModel single(std::string label) {
    return GroupModel{{std::move(label)}, {1.0}};
  }

  void validate() const {
    if (labels.empty() || labels.size() != probabilities.size()) {
      throw std::invalid_argument("group model labels/probabilities mismatch");
    }
    double sum = 0.0;
    for (double p : probabilities) {
      if (p < 0.0) throw std::invalid_argument("negative group probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw std::invalid_argument("group probabilities must sum to 1");
    }
  }

  std::string draw(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      acc += probabilities[k];
      if (u < acc) return labels[k];
    }
    return labels.back();
  }
};

struct BlockModelSpec {
  double phi = 0.0;    // within-block edge probability
  double sigma = 1.0;  // cross-block attenuation
  long long n_frame = 0;
  long long n_hidden_only = 0;

  void validate() const {
    if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("phi not in [0,1]");
    if (sigma < 0.0 || sigma > 1.0) {
      throw std::invalid_argument("sigma not in [0,1]");
    }
    if (n_frame < 1) throw std::invalid_argument("n_frame must be >= 1");
    if (n_hidden_only < 0) throw std::invalid_argument("negative block size");
  }
};

struct MixtureComponent {
  long long n_hidden = 0;
  long long n_frame = 0;
  double edge_probability = 0.0;
};

struct MixtureSpec {
  std::vector<MixtureComponent> components;

  void validate() const {
    if (components.empty()) throw std::invalid_argument("empty mixture spec");
    long long frame_total = 0;
    for (const auto& c : components) {
      if (c.edge_probability < 0.0 || c.edge_probability > 1.0) {
        throw std::invalid_argument("edge probability not in [0,1]");
      }
      if (c.n_frame > c.n_hidden) {
        throw std::invalid_argument("component frame larger than its hidden set");
      }
      if (c.n_hidden < 0 || c.n_frame < 0) {
        throw std::invalid_argument("negative component size");
      }
      frame_total += c.n_frame;
    }
    if (frame_total < 1) throw std::invalid_argument("mixture frame is empty");
  }
};

namespace detail {

// Visits each index in [0, n) independently with probability p using
// geometric skips, so the cost is proportional to the number of hits.
template <typename Emit>
void bernoulli_process(Rng& rng, std::uint64_t n, double p, Emit emit) {
  if (p <= 0.0 || n == 0) return;
  if (p >= 1.0) {
    for (std::uint64_t k = 0; k < n; ++k) emit(k);
    return;
  }
  const double log_q = std::log1p(-p);
  std::uint64_t pos = 0;  // next unexamined index
  while (pos < n) {
    const double skip = std::floor(std::log1p(-rng.uniform()) / log_q);
    if (skip >= static_cast<double>(n - pos)) return;
    pos += static_cast<std::uint64_t>(skip);
    emit(pos);
    ++pos;
  }
}

// Unordered pairs within one node list.
template <typename Emit>
void sample_pairs_within(Rng& rng, const std::vector<NodeId>& nodes, double p,
                         Emit emit) {
  const std::uint64_t n = nodes.size();
  if (n < 2) return;
  const std::uint64_t n_pairs = n * (n - 1) / 2;
  // Row i of the upper triangle holds pairs (i, i+1..n-1) and starts at
  // linear index i*n - i*(i+1)/2.
  auto row_start = [n](std::uint64_t r) { return r * n - r * (r + 1) / 2; };
  bernoulli_process(rng, n_pairs, p, [&](std::uint64_t k) {
    const double nd = static_cast<double>(n);
    const double guess =
        nd - 0.5 - std::sqrt(std::max(0.0, (nd - 0.5) * (nd - 0.5) -
                                               2.0 * static_cast<double>(k)));
    std::uint64_t i = static_cast<std::uint64_t>(std::max(0.0, guess));
    if (i > n - 2) i = n - 2;
    while (i > 0 && row_start(i) > k) --i;
    while (row_start(i + 1) <= k) ++i;
    const std::uint64_t j = i + 1 + (k - row_start(i));
    emit(nodes[i], nodes[j]);
  });
}

// Pairs with one endpoint in each list (lists must be disjoint).
template <typename Emit>
void sample_pairs_across(Rng& rng, const std::vector<NodeId>& a,
                         const std::vector<NodeId>& b, double p, Emit emit) {
  const std::uint64_t rows = a.size();
  const std::uint64_t cols = b.size();
  if (rows == 0 || cols == 0) return;
  bernoulli_process(rng, rows * cols, p, [&](std::uint64_t k) {
    emit(a[k / cols], b[k % cols]);
  });
}

inline std::vector<std::string> draw_groups(Rng& rng, std::size_t n,
                                            const GroupModel& groups) {
  groups.validate();
  std::vector<std::string> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(groups.draw(rng));
  return out;
}

}  // namespace detail

// Homogeneous-mixing population: every pair of hidden nodes is connected
// independently with probability p; the frame is a uniform random subset of
// the hidden set.
inline Population generate_er(long long n_hidden, long long n_frame, double p,
                              std::uint64_t seed,
                              const GroupModel& groups = GroupModel::twelve_cells()) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("p not in [0,1]");
  if (n_frame > n_hidden) {
    throw std::invalid_argument("n_frame exceeds n_hidden");
  }
  if (n_frame < 1) throw std::invalid_argument("n_frame must be >= 1");
  Rng rng(seed);

  const std::size_t n = static_cast<std::size_t>(n_hidden);
  std::vector<std::string> group_of = detail::draw_groups(rng, n, groups);
  std::vector<bool> in_frame(n, false);
  for (std::uint32_t idx : rng.sample_without_replacement(
           static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n_frame))) {
    in_frame[idx] = true;
  }

  std::vector<NodeId> all(n);
  std::iota(all.begin(), all.end(), 0);
  UndirectedNetwork net(n);
  detail::sample_pairs_within(rng, all, p,
                              [&](NodeId u, NodeId v) { net.add_edge(u, v); });
  net.finalize();
  return Population(std::move(in_frame), std::vector<bool>(n, true),
                    std::move(group_of), std::move(net));
}

// Two-block population over the hidden set: frame members are nodes
// [0, n_frame), the rest are hidden-only.  Same-block pairs connect with
// probability phi, cross-block pairs with sigma*phi.
inline Population generate_block(const BlockModelSpec& spec, std::uint64_t seed,
                                 const GroupModel& groups = GroupModel::twelve_cells()) {
  spec.validate();
  Rng rng(seed);
  const std::size_t n =
      static_cast<std::size_t>(spec.n_frame + spec.n_hidden_only);
  std::vector<std::string> group_of = detail::draw_groups(rng, n, groups);
  std::vector<bool> in_frame(n, false);
  std::fill(in_frame.begin(), in_frame.begin() + spec.n_frame, true);

  std::vector<NodeId> frame(spec.n_frame);
  std::iota(frame.begin(), frame.end(), 0);
  std::vector<NodeId> rest(spec.n_hidden_only);
  std::iota(rest.begin(), rest.end(), static_cast<NodeId>(spec.n_frame));

  UndirectedNetwork net(n);
  auto add = [&](NodeId u, NodeId v) { net.add_edge(u, v); };
  detail::sample_pairs_within(rng, frame, spec.phi, add);
  detail::sample_pairs_within(rng, rest, spec.phi, add);
  detail::sample_pairs_across(rng, frame, rest, spec.sigma * spec.phi, add);
  net.finalize();
  return Population(std::move(in_frame), std::vector<bool>(n, true),
                    std::move(group_of), std::move(net));
}

// Non-interacting mixture: each component mixes homogeneously inside itself
// and shares no edges with the others.
inline Population generate_mixture(const MixtureSpec& spec, std::uint64_t seed,
                                   const GroupModel& groups = GroupModel::twelve_cells()) {
  spec.validate();
  Rng rng(seed);
  std::size_t n = 0;
  for (const auto& c : spec.components) n += static_cast<std::size_t>(c.n_hidden);

  std::vector<std::string> group_of = detail::draw_groups(rng, n, groups);
  std::vector<bool> in_frame(n, false);
  UndirectedNetwork net(n);

  NodeId offset = 0;
  for (const auto& c : spec.components) {
    std::vector<NodeId> members(c.n_hidden);
    std::iota(members.begin(), members.end(), offset);
    for (std::uint32_t idx : rng.sample_without_replacement(
             static_cast<std::uint32_t>(c.n_hidden),
             static_cast<std::uint32_t>(c.n_frame))) {
      in_frame[offset + idx] = true;
    }
    detail::sample_pairs_within(rng, members, c.edge_probability,
                                [&](NodeId u, NodeId v) { net.add_edge(u, v); });
    offset += static_cast<NodeId>(c.n_hidden);
  }
  net.finalize();
  return Population(std::move(in_frame), std::vector<bool>(n, true),
                    std::move(group_of), std::move(net));
}

}  // namespace netreport
