#ifndef EWGSL_DATASET_H_
#define EWGSL_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ewgsl/graph.h"

namespace ewgsl {

// Per-node class ids plus the labeled/unlabeled partition of the node set.
struct LabelSet {
  std::vector<int> labels;
  std::vector<bool> labeled;  // empty until SplitLabels() is applied
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  bool IsLabeled(NodeId i) const { return !labeled.empty() && labeled[i]; }
  std::size_t NumLabeled() const;
  std::vector<NodeId> LabeledNodes() const;
  std::vector<NodeId> UnlabeledNodes() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;
};

struct LabeledGraph {
  WeightedGraph graph;
  LabelSet labels;
};

struct Ml100kOptions {
  // Keep only the movies whose label belongs to one of the `max_classes`
  // most populous genre classes; 0 keeps every class.
  int max_classes = 9;
};

struct Ml100kStats {
  std::size_t num_ratings = 0;
  std::size_t num_users = 0;
  std::size_t num_movies_rated = 0;
  std::size_t num_nodes = 0;
  std::size_t num_edges = 0;
  int num_classes = 0;
  // Genre index (0..18 in u.item order) behind each compacted class id.
  std::vector<int> class_genres;
  // Original MovieLens item id behind each node id.
  std::vector<int> node_items;
};

inline constexpr int kMovieLensGenres = 19;
const std::vector<std::string>& MovieLensGenreNames();

// Builds the movie co-rating graph: per user, ratings sorted by
// (timestamp, item id); each consecutive pair of movies adds 1 to the weight
// of their undirected edge. Each movie is labeled with its genre of highest
// dataset-wide frequency (ties to the lowest genre index).
LabeledGraph BuildMl100kGraph(const std::filesystem::path& ratings_file,
                              const std::filesystem::path& items_file,
                              const Ml100kOptions& options = {},
                              Ml100kStats* stats = nullptr);

// Weighted planted partition.
struct SyntheticSpec {
  NodeId num_nodes = 200;
  int num_classes = 4;
  double intra_p = 0.2;
  double inter_p = 0.02;
  // Edge weights are 1 + Poisson(mean).
  double intra_weight_mean = 5.0;
  double inter_weight_mean = 1.0;
  std::uint64_t seed = 0;
};

// Nodes are assigned to near-equal contiguous blocks; every pair is connected
// independently with the intra- or inter-block probability.
LabeledGraph GenerateSyntheticGraph(const SyntheticSpec& spec);

// Stratified split: ceil(fraction * n) labeled nodes in total, apportioned to
// classes by largest remainder with at least one per class.
LabelSet SplitLabels(const LabelSet& labels, double labeled_fraction,
                     std::uint64_t seed);

}  // namespace ewgsl

#endif  // EWGSL_DATASET_H_
