#include "ewgsl/graph.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <utility>

namespace ewgsl {

SelfLoopMode ParseSelfLoopMode(const std::string& name) {
  if (name == "max") return SelfLoopMode::kMax;
  if (name == "min") return SelfLoopMode::kMin;
  if (name == "avg") return SelfLoopMode::kAvg;
  throw std::invalid_argument("unknown self-loop mode '" + name +
                              "' (expected max, min or avg)");
}

std::string SelfLoopModeName(SelfLoopMode mode) {
  switch (mode) {
    case SelfLoopMode::kMax:
      return "max";
    case SelfLoopMode::kMin:
      return "min";
    case SelfLoopMode::kAvg:
      return "avg";
  }
  return "max";
}

WeightedGraph WeightedGraph::FromEdges(NodeId num_nodes,
                                       std::span<const Edge> edges) {
  if (num_nodes < 0) throw GraphError("negative node count");
  std::map<std::pair<NodeId, NodeId>, double> pairs;
  for (const Edge& e : edges) {
    if (e.u < 0 || e.u >= num_nodes || e.v < 0 || e.v >= num_nodes) {
      throw GraphError("node id out of range in edge (" + std::to_string(e.u) +
                       ", " + std::to_string(e.v) + ")");
    }
    if (!std::isfinite(e.weight) || e.weight <= 0.0) {
      throw GraphError("non-positive weight on edge (" + std::to_string(e.u) +
                       ", " + std::to_string(e.v) + ")");
    }
    if (e.u == e.v) {
      throw GraphError("self-loop on node " + std::to_string(e.u) +
                       " in input edge list");
    }
    auto key = std::minmax(e.u, e.v);
    auto [it, inserted] = pairs.emplace(key, e.weight);
    if (!inserted) it->second = std::max(it->second, e.weight);
  }

  WeightedGraph g;
  g.num_nodes_ = num_nodes;
  g.edges_.reserve(pairs.size());
  for (const auto& [key, w] : pairs) g.edges_.push_back({key.first, key.second, w});

  std::vector<std::size_t> degree(num_nodes, 0);
  for (const Edge& e : g.edges_) {
    ++degree[e.u];
    ++degree[e.v];
  }
  g.offsets_.assign(num_nodes + 1, 0);
  for (NodeId i = 0; i < num_nodes; ++i) g.offsets_[i + 1] = g.offsets_[i] + degree[i];
  g.neighbors_.resize(g.offsets_.back());
  g.neighbor_weights_.resize(g.offsets_.back());
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  // Edges are sorted by (u, v), so filling in this order leaves each
  // neighbor list sorted: entries from smaller u arrive before larger v.
  for (const Edge& e : g.edges_) {
    g.neighbors_[cursor[e.v]] = e.u;
    g.neighbor_weights_[cursor[e.v]++] = e.weight;
  }
  for (const Edge& e : g.edges_) {
    g.neighbors_[cursor[e.u]] = e.v;
    g.neighbor_weights_[cursor[e.u]++] = e.weight;
  }
  return g;
}

std::span<const NodeId> WeightedGraph::Neighbors(NodeId i) const {
  return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::span<const double> WeightedGraph::NeighborWeights(NodeId i) const {
  return {neighbor_weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
}

std::size_t WeightedGraph::Degree(NodeId i) const {
  return offsets_[i + 1] - offsets_[i];
}

double WeightedGraph::Weight(NodeId u, NodeId v) const {
  if (u < 0 || u >= num_nodes_ || v < 0 || v >= num_nodes_) return 0.0;
  auto nbrs = Neighbors(u);
  auto it = std::lower_bound(nbrs.begin(), nbrs.end(), v);
  if (it == nbrs.end() || *it != v) return 0.0;
  return NeighborWeights(u)[it - nbrs.begin()];
}

std::vector<NodeId> WeightedGraph::IsolatedNodes() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < num_nodes_; ++i) {
    if (Degree(i) == 0) out.push_back(i);
  }
  return out;
}

double WeightedGraph::SelfLoopWeight(NodeId i) const {
  if (self_weights_.empty()) {
    throw GraphError("self-loop weights have not been assigned");
  }
  return self_weights_[i];
}

WeightedGraph AssignSelfLoopWeights(const WeightedGraph& graph,
                                    SelfLoopMode mode) {
  WeightedGraph g = graph;
  g.self_weights_.assign(g.num_nodes(), 1.0);
  for (NodeId i = 0; i < g.num_nodes(); ++i) {
    auto w = g.NeighborWeights(i);
    if (w.empty()) continue;
    switch (mode) {
      case SelfLoopMode::kMax:
        g.self_weights_[i] = *std::max_element(w.begin(), w.end());
        break;
      case SelfLoopMode::kMin:
        g.self_weights_[i] = *std::min_element(w.begin(), w.end());
        break;
      case SelfLoopMode::kAvg:
        g.self_weights_[i] =
            std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
        break;
    }
  }
  return g;
}

double ImpactFactors::At(NodeId i, NodeId j) const {
  for (std::size_t k = RowBegin(i); k < RowEnd(i); ++k) {
    if (cols[k] == j) return rho[k];
  }
  return 0.0;
}

namespace {

ImpactFactors BuildPattern(const WeightedGraph& graph) {
  ImpactFactors out;
  const NodeId n = graph.num_nodes();
  out.row_offsets.assign(n + 1, 0);
  for (NodeId i = 0; i < n; ++i) {
    out.row_offsets[i + 1] = out.row_offsets[i] + graph.Degree(i) + 1;
  }
  out.cols.reserve(out.row_offsets.back());
  for (NodeId i = 0; i < n; ++i) {
    out.cols.push_back(i);
    for (NodeId j : graph.Neighbors(i)) out.cols.push_back(j);
  }
  return out;
}

}  // namespace

ImpactFactors BuildImpactFactors(const WeightedGraph& graph) {
  ImpactFactors out = BuildPattern(graph);
  out.rho.reserve(out.cols.size());
  for (NodeId i = 0; i < graph.num_nodes(); ++i) {
    auto w = graph.NeighborWeights(i);
    if (!graph.has_self_loops()) {
      throw GraphError("node " + std::to_string(i) +
                       " has no self-loop weight; assign self-loops first");
    }
    if (w.empty()) {
      out.rho.push_back(1.0);
      continue;
    }
    const double denom = std::accumulate(w.begin(), w.end(), 0.0);
    out.rho.push_back(graph.SelfLoopWeight(i) / denom);
    for (double wij : w) out.rho.push_back(wij / denom);
  }
  return out;
}

ImpactFactors UniformImpactFactors(const WeightedGraph& graph) {
  ImpactFactors out = BuildPattern(graph);
  out.rho.assign(out.cols.size(), 1.0);
  return out;
}

std::size_t NoiseEdgeCount(std::size_t num_edges, double fraction) {
  // The epsilon absorbs products such as 0.1 * 30 = 3.0000000000000004.
  const double target = fraction * static_cast<double>(num_edges);
  return static_cast<std::size_t>(std::max(0.0, std::ceil(target - 1e-9)));
}

WeightedGraph InjectNoiseEdges(const WeightedGraph& graph, double fraction,
                               std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw GraphError("noise fraction must lie in [0, 1]");
  }
  const std::size_t count = NoiseEdgeCount(graph.num_edges(), fraction);
  if (count == 0) return graph;

  const auto n = static_cast<std::uint64_t>(graph.num_nodes());
  const std::uint64_t total_pairs = n * (n - 1) / 2;
  const std::uint64_t free_pairs = total_pairs - graph.num_edges();
  if (count > free_pairs) {
    throw GraphError("cannot add " + std::to_string(count) + " noise edges: only " +
                     std::to_string(free_pairs) + " unconnected pairs remain");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> chosen;
  chosen.reserve(count);
  if (count * 2 <= free_pairs) {
    // Sparse case: rejection sampling over all pairs is uniform without
    // replacement once repeats and existing edges are discarded.
    std::uniform_int_distribution<NodeId> pick(0, graph.num_nodes() - 1);
    std::set<std::pair<NodeId, NodeId>> seen;
    while (chosen.size() < count) {
      NodeId u = pick(rng);
      NodeId v = pick(rng);
      if (u == v) continue;
      auto key = std::minmax(u, v);
      if (graph.HasEdge(key.first, key.second)) continue;
      if (!seen.insert(key).second) continue;
      chosen.emplace_back(key.first, key.second);
    }
  } else {
    std::vector<std::pair<NodeId, NodeId>> candidates;
    candidates.reserve(free_pairs);
    for (NodeId u = 0; u < graph.num_nodes(); ++u) {
      for (NodeId v = u + 1; v < graph.num_nodes(); ++v) {
        if (!graph.HasEdge(u, v)) candidates.emplace_back(u, v);
      }
    }
    // Partial Fisher-Yates.
    for (std::size_t k = 0; k < count; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, candidates.size() - 1);
      std::swap(candidates[k], candidates[pick(rng)]);
      chosen.push_back(candidates[k]);
    }
  }

  std::vector<Edge> edges = graph.edges();
  std::uniform_int_distribution<std::size_t> pick_weight(0, graph.num_edges() - 1);
  for (const auto& [u, v] : chosen) {
    edges.push_back({u, v, graph.edges()[pick_weight(rng)].weight});
  }
  // Self-loop weights depend on the neighborhood and are not carried over.
  return WeightedGraph::FromEdges(graph.num_nodes(), edges);
}

}  // namespace ewgsl
