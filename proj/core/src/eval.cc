#include "ewgsl/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "ewgsl/io.h"

namespace ewgsl {

EvalReport Evaluate(std::span<const int> predictions, const LabelSet& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("predictions cover " + std::to_string(predictions.size()) +
                                " nodes, labels " + std::to_string(labels.size()));
  }
  const int c = labels.num_classes;
  EvalReport r;
  r.confusion.assign(c, std::vector<std::size_t>(c, 0));
  for (NodeId i : labels.UnlabeledNodes()) {
    const int y = labels.labels[i];
    const int p = predictions[i];
    if (p < 0 || p >= c) {
      throw std::invalid_argument("prediction " + std::to_string(p) + " for node " +
                                  std::to_string(i) + " is not a class id");
    }
    ++r.confusion[y][p];
    ++r.num_evaluated;
  }
  if (r.num_evaluated == 0) throw std::invalid_argument("no unlabeled nodes to evaluate");

  std::size_t correct = 0;
  std::vector<std::size_t> predicted(c, 0);
  r.per_class.resize(c);
  for (int y = 0; y < c; ++y) {
    correct += r.confusion[y][y];
    for (int p = 0; p < c; ++p) {
      r.per_class[y].support += r.confusion[y][p];
      predicted[p] += r.confusion[y][p];
    }
  }
  const double n = static_cast<double>(r.num_evaluated);
  r.accuracy = correct / n;

  double pooled_fp = 0.0, pooled_fn = 0.0;
  for (int k = 0; k < c; ++k) {
    pooled_fp += static_cast<double>(predicted[k] - r.confusion[k][k]);
    pooled_fn += static_cast<double>(r.per_class[k].support - r.confusion[k][k]);
  }
  r.micro_f1 = correct > 0 ? 2.0 * correct / (2.0 * correct + pooled_fp + pooled_fn) : 0.0;

  int present = 0;
  for (int k = 0; k < c; ++k) {
    auto& m = r.per_class[k];
    const double tp = static_cast<double>(r.confusion[k][k]);
    m.precision = predicted[k] > 0 ? tp / predicted[k] : 0.0;
    m.recall = m.support > 0 ? tp / m.support : 0.0;
    m.f1 = tp > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (m.support > 0 || predicted[k] > 0) {
      ++present;
      r.macro_f1 += m.f1;
    }
    r.weighted_f1 += m.f1 * m.support / n;
  }
  r.macro_f1 /= present;
  return r;
}

std::string MetricsJson(const EvalReport& report, std::uint64_t seed,
                        const std::string& variant, const std::string& config_hash) {
  nlohmann::ordered_json j;
  j["seed"] = seed;
  j["variant"] = variant;
  j["config_hash"] = config_hash;
  j["acc"] = report.accuracy;
  j["micro_f1"] = report.micro_f1;
  j["macro_f1"] = report.macro_f1;
  j["weighted_f1"] = report.weighted_f1;
  j["num_evaluated"] = report.num_evaluated;
  auto per_class = nlohmann::ordered_json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  j["per_class"] = std::move(per_class);
  j["confusion"] = report.confusion;
  return j.dump();
}

std::string VariantName(Variant variant) {
  switch (variant) {
    case Variant::kFull:
      return "full";
    case Variant::kWeightsOnly:
      return "weights-only";
    case Variant::kSparsityOnly:
      return "sparsity-only";
    case Variant::kVanilla:
      return "vanilla";
  }
  return "full";
}

Hyperparameters ApplyVariant(Hyperparameters hyper, Variant variant) {
  if (variant == Variant::kWeightsOnly || variant == Variant::kVanilla) hyper.alpha = 1.0;
  if (variant == Variant::kSparsityOnly || variant == Variant::kVanilla) {
    hyper.weighted_attention = false;
  }
  return hyper;
}

MeanStd Summarize(std::span<const double> values) {
  MeanStd s;
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (values.size() - 1));
  }
  return s;
}

AblationTable RunAblation(const std::function<LabeledGraph(std::uint64_t)>& prepare,
                          std::span<const std::uint64_t> seeds, const Hyperparameters& base,
                          std::span<const Variant> variants, const TrainOptions& options) {
  AblationTable table;
  for (std::uint64_t seed : seeds) {
    const LabeledGraph data = prepare(seed);
    for (Variant v : variants) {
      Hyperparameters hyper = ApplyVariant(base, v);
      hyper.seed = seed;
      const TrainResult result = Train(data.graph, data.labels, hyper, options);
      table.runs.push_back({v, seed, Evaluate(result.predictions, data.labels)});
    }
  }
  for (Variant v : variants) {
    std::vector<double> acc, micro, macro;
    for (const auto& run : table.runs) {
      if (run.variant != v) continue;
      acc.push_back(run.report.accuracy);
      micro.push_back(run.report.micro_f1);
      macro.push_back(run.report.macro_f1);
    }
    table.summary.push_back({v, Summarize(acc), Summarize(micro), Summarize(macro)});
  }
  return table;
}

std::string FormatAblationTable(const AblationTable& table) {
  std::ostringstream out;
  out << "variant        acc_mean  acc_std   microF1   macroF1\n";
  out.setf(std::ios::fixed);
  out.precision(4);
  for (const auto& s : table.summary) {
    std::string name = VariantName(s.variant);
    name.resize(14, ' ');
    out << name << ' ' << s.accuracy.mean << "    " << s.accuracy.stddev << "    "
        << s.micro_f1.mean << "    " << s.macro_f1.mean << '\n';
  }
  return out.str();
}

namespace {

// Head-averaged final-layer attention of one row, keyed by neighbor slot.
std::vector<double> SlotWeights(const std::vector<double>& avg, const ImpactFactors& pattern,
                                const WeightedGraph& graph, NodeId node,
                                std::span<const NodeId> chosen) {
  std::vector<double> out(chosen.size(), 0.0);
  const auto neighbors = graph.Neighbors(node);
  for (std::size_t s = 0; s < chosen.size(); ++s) {
    if (chosen[s] < 0) continue;
    const auto it = std::lower_bound(neighbors.begin(), neighbors.end(), chosen[s]);
    // Row layout: self entry first, then neighbors in id order.
    const std::size_t entry = pattern.RowBegin(node) + 1 + (it - neighbors.begin());
    out[s] = avg[entry];
  }
  return out;
}

}  // namespace

std::vector<AttentionExportRow> ExportAttention(const ModelParams& model,
                                                const TrainingContext& ctx,
                                                const ModelParams& baseline_model,
                                                const TrainingContext& baseline_ctx,
                                                std::span<const NodeId> nodes, int k) {
  if (k <= 0) throw std::invalid_argument("k_neighbors must be positive");
  const NodeId n = ctx.graph.num_nodes();
  if (baseline_ctx.graph.num_nodes() != n) {
    throw std::invalid_argument("comparison model was built on a different graph");
  }
  for (NodeId v : nodes) {
    if (v < 0 || v >= n) throw std::invalid_argument("unknown node id " + std::to_string(v));
  }
  const auto fwd = Forward(model, ctx.features, ctx.rho, ctx.attention);
  const auto base = Forward(baseline_model, baseline_ctx.features, baseline_ctx.rho,
                            baseline_ctx.attention);
  const auto avg = fwd.layers.back().attention.HeadAverage();
  const auto base_avg = base.layers.back().attention.HeadAverage();

  std::vector<AttentionExportRow> rows;
  for (NodeId v : nodes) {
    const auto nb = ctx.graph.Neighbors(v);
    const auto w = ctx.graph.NeighborWeights(v);
    std::vector<std::size_t> order(nb.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
    AttentionExportRow row;
    row.node = v;
    row.neighbors.assign(k, -1);
    for (std::size_t s = 0; s < order.size() && s < static_cast<std::size_t>(k); ++s) {
      row.neighbors[s] = nb[order[s]];
    }
    row.weights = SlotWeights(avg, ctx.rho, ctx.graph, v, row.neighbors);
    row.baseline = SlotWeights(base_avg, baseline_ctx.rho, baseline_ctx.graph, v, row.neighbors);
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteAttentionCsv(const std::filesystem::path& path,
                       std::span<const AttentionExportRow> rows) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  const std::size_t k = rows.empty() ? 0 : rows.front().neighbors.size();
  out << "node,row";
  for (std::size_t s = 1; s <= k; ++s) out << ",slot_" << s;
  out << '\n';
  for (const auto& r : rows) {
    out << r.node << ",neighbor";
    for (NodeId id : r.neighbors) out << ',' << id;
    out << '\n' << r.node << ",ewgsl";
    for (double x : r.weights) out << ',' << FormatDouble(x);
    out << '\n' << r.node << ",softmax";
    for (double x : r.baseline) out << ',' << FormatDouble(x);
    out << '\n';
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

}  // namespace ewgsl
