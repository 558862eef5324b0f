#ifndef EWGSL_EVAL_H_
#define EWGSL_EVAL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ewgsl/dataset.h"
#include "ewgsl/model.h"
#include "ewgsl/training.h"

namespace ewgsl {

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // true members among the evaluated nodes
};

// Metrics over the unlabeled nodes only. For single-label predictions that
// cover every evaluated node, micro-F1 equals accuracy.
struct EvalReport {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  // Unweighted mean over classes that occur in truth or prediction.
  double macro_f1 = 0.0;
  // Support-weighted mean.
  double weighted_f1 = 0.0;
  std::vector<ClassMetrics> per_class;
  // confusion[true][predicted]
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t num_evaluated = 0;
};

// Throws std::invalid_argument when there is no unlabeled node or a
// prediction is out of range.
EvalReport Evaluate(std::span<const int> predictions, const LabelSet& labels);

// One JSON object (no trailing newline) with the report plus run metadata.
std::string MetricsJson(const EvalReport& report, std::uint64_t seed,
                        const std::string& variant, const std::string& config_hash);

enum class Variant {
  kFull,          // impact-factor attention, alpha-entmax
  kWeightsOnly,   // impact-factor attention, softmax
  kSparsityOnly,  // uniform attention scale, alpha-entmax
  kVanilla,       // uniform attention scale, softmax (plain GAT)
};

inline constexpr Variant kAllVariants[] = {Variant::kFull, Variant::kWeightsOnly,
                                           Variant::kSparsityOnly, Variant::kVanilla};

std::string VariantName(Variant variant);
Hyperparameters ApplyVariant(Hyperparameters hyper, Variant variant);

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single value
};
MeanStd Summarize(std::span<const double> values);

struct AblationRun {
  Variant variant = Variant::kFull;
  std::uint64_t seed = 0;
  EvalReport report;
};

struct AblationSummary {
  Variant variant = Variant::kFull;
  MeanStd accuracy;
  MeanStd micro_f1;
  MeanStd macro_f1;
};

struct AblationTable {
  std::vector<AblationRun> runs;
  std::vector<AblationSummary> summary;
};

// Trains every variant on the graph and split returned by `prepare(seed)`,
// so all variants of a seed see identical data.
AblationTable RunAblation(const std::function<LabeledGraph(std::uint64_t)>& prepare,
                          std::span<const std::uint64_t> seeds, const Hyperparameters& base,
                          std::span<const Variant> variants = kAllVariants,
                          const TrainOptions& options = {});

// Plain-text comparison table (one line per variant).
std::string FormatAblationTable(const AblationTable& table);

struct AttentionExportRow {
  NodeId node = 0;
  std::vector<NodeId> neighbors;  // k slots, -1 where the node has fewer neighbors
  std::vector<double> weights;    // final layer, head-averaged e'; 0 in empty slots
  std::vector<double> baseline;   // same slots under the comparison model
};

// The k heaviest neighbors of each node (ties to the lower id) with their
// attention under `model` and under `baseline_model`. Unknown node ids throw.
std::vector<AttentionExportRow> ExportAttention(const ModelParams& model,
                                                const TrainingContext& ctx,
                                                const ModelParams& baseline_model,
                                                const TrainingContext& baseline_ctx,
                                                std::span<const NodeId> nodes, int k);

// Columns: node,row,slot_1..slot_k with three rows per node: `neighbor`
// (ids, -1 padding), `ewgsl` and `softmax`.
void WriteAttentionCsv(const std::filesystem::path& path,
                       std::span<const AttentionExportRow> rows);

}  // namespace ewgsl

#endif  // EWGSL_EVAL_H_
