#ifndef EWGSL_GRAPH_H_
#define EWGSL_GRAPH_H_

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ewgsl {

using NodeId = std::int32_t;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class SelfLoopMode { kMax, kMin, kAvg };

SelfLoopMode ParseSelfLoopMode(const std::string& name);
std::string SelfLoopModeName(SelfLoopMode mode);

// Undirected graph with strictly positive edge weights. Adjacency is kept in
// CSR form with each neighbor list sorted by node id. Self-loop weights are
// not part of the edge set; they are attached separately by
// AssignSelfLoopWeights().
class WeightedGraph {
 public:
  WeightedGraph() = default;

  // Validates and canonicalizes `edges`: both orientations of a pair collapse
  // into one undirected edge keeping the larger weight. Throws GraphError on
  // non-positive or non-finite weights, out-of-range ids and self-loops.
  static WeightedGraph FromEdges(NodeId num_nodes, std::span<const Edge> edges);

  NodeId num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }

  // Canonical edge list: u < v, sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const NodeId> Neighbors(NodeId i) const;
  std::span<const double> NeighborWeights(NodeId i) const;
  std::size_t Degree(NodeId i) const;

  // 0 when the pair is not connected.
  double Weight(NodeId u, NodeId v) const;
  bool HasEdge(NodeId u, NodeId v) const { return Weight(u, v) > 0.0; }

  std::vector<NodeId> IsolatedNodes() const;

  bool has_self_loops() const { return !self_weights_.empty(); }
  double SelfLoopWeight(NodeId i) const;
  const std::vector<double>& self_loop_weights() const { return self_weights_; }

  friend bool operator==(const WeightedGraph& a, const WeightedGraph& b) {
    return a.num_nodes_ == b.num_nodes_ && a.edges_ == b.edges_ &&
           a.self_weights_ == b.self_weights_;
  }

 private:
  friend WeightedGraph AssignSelfLoopWeights(const WeightedGraph&,
                                             SelfLoopMode);

  NodeId num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<NodeId> neighbors_;
  std::vector<double> neighbor_weights_;
  std::vector<double> self_weights_;
};

// w_ii = max/min/mean of the node's neighbor weights; isolated nodes get 1.
WeightedGraph AssignSelfLoopWeights(const WeightedGraph& graph,
                                    SelfLoopMode mode);

// Sparse attention support: one row per node holding the self entry first,
// followed by the neighbors in ascending id order. `rho` is the per-entry
// impact factor that scales the attention score.
struct ImpactFactors {
  std::vector<std::size_t> row_offsets;  // size n + 1
  std::vector<NodeId> cols;
  std::vector<double> rho;

  NodeId num_nodes() const {
    return static_cast<NodeId>(row_offsets.size()) - 1;
  }
  std::size_t num_entries() const { return cols.size(); }
  std::size_t RowBegin(NodeId i) const { return row_offsets[i]; }
  std::size_t RowEnd(NodeId i) const { return row_offsets[i + 1]; }
  std::span<const double> Row(NodeId i) const {
    return {rho.data() + RowBegin(i), RowEnd(i) - RowBegin(i)};
  }
  // Looks up rho_ij; 0 when j is not in row i.
  double At(NodeId i, NodeId j) const;
};

// rho_ij = w_ij / sum_{k in N(i)} w_ik for neighbors and for the self entry.
// The denominator excludes the self-loop, so a full row can exceed 1.
// Requires self-loop weights; isolated nodes get rho_ii = 1.
ImpactFactors BuildImpactFactors(const WeightedGraph& graph);

// Same sparsity pattern with every rho equal to 1: attention ignores weights.
ImpactFactors UniformImpactFactors(const WeightedGraph& graph);

// Adds exactly ceil(fraction * |E|) edges between distinct, previously
// unconnected pairs chosen uniformly without replacement. Each new weight is
// drawn uniformly from the existing edge-weight multiset.
WeightedGraph InjectNoiseEdges(const WeightedGraph& graph, double fraction,
                               std::uint64_t seed);

std::size_t NoiseEdgeCount(std::size_t num_edges, double fraction);

}  // namespace ewgsl

#endif  // EWGSL_GRAPH_H_
