#include "cli.h"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ewgsl/checkpoint.h"
#include "ewgsl/config.h"
#include "ewgsl/dataset.h"
#include "ewgsl/eval.h"
#include "ewgsl/io.h"
#include "ewgsl/training.h"

#ifndef EWGSL_VERSION
#define EWGSL_VERSION "unknown"
#endif

namespace ewgsl {
namespace {

namespace fs = std::filesystem;

using Extra = std::vector<std::pair<std::string, std::string>>;

fs::path SeedDir(const ExperimentConfig& c, std::uint64_t seed) {
  return c.out_dir / ("seed_" + std::to_string(seed));
}

void WriteManifest(const ExperimentConfig& c, const std::string& command, const Extra& extra) {
  fs::create_directories(c.out_dir);
  const fs::path path = c.out_dir / ("manifest_" + command + ".txt");
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  out << "command = " << command << '\n';
  out << "ewgsl_version = " << EWGSL_VERSION << '\n';
  out << "eigen_version = " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.'
      << EIGEN_MINOR_VERSION << '\n';
  out << "compiler = " << __VERSION__ << '\n';
  out << "config_hash = " << ConfigHash(c) << '\n';
  for (const auto& [k, v] : extra) out << k << " = " << v << '\n';
  out << "[config]\n" << CanonicalConfigText(c);
}

void WritePredictions(const fs::path& path, std::span<const int> predictions) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open for writing");
  out << "# node\tpredicted\n";
  for (std::size_t i = 0; i < predictions.size(); ++i) out << i << '\t' << predictions[i] << '\n';
}

void AppendSeedSummary(Extra& extra, const std::vector<double>& acc,
                       const std::vector<double>& micro) {
  const auto a = Summarize(acc);
  const auto m = Summarize(micro);
  extra.emplace_back("acc_mean", FormatDouble(a.mean));
  extra.emplace_back("acc_std", FormatDouble(a.stddev));
  extra.emplace_back("micro_f1_mean", FormatDouble(m.mean));
  extra.emplace_back("micro_f1_std", FormatDouble(m.stddev));
}

std::string SeedList(const ExperimentConfig& c) { return ConfigToMap(c).at("seeds"); }

int BuildDataset(const ExperimentConfig& c, std::ostream& out) {
  if (c.ratings_path.empty() || c.items_path.empty()) {
    throw ConfigError("build-dataset needs ratings and items paths (--ratings, --items)");
  }
  Ml100kOptions options;
  options.max_classes = c.ml100k_max_classes;
  Ml100kStats stats;
  const auto data = BuildMl100kGraph(c.ratings_path, c.items_path, options, &stats);
  fs::create_directories(c.out_dir);
  WriteGraph(c.out_dir / "graph.tsv", data.graph);
  WriteLabels(c.out_dir / "labels.tsv", data.labels);
  std::string genres;
  for (int g : stats.class_genres) {
    if (!genres.empty()) genres += ",";
    genres += MovieLensGenreNames()[g];
  }
  out << "ratings=" << stats.num_ratings << " users=" << stats.num_users
      << " movies_rated=" << stats.num_movies_rated << '\n'
      << "nodes=" << stats.num_nodes << " edges=" << stats.num_edges
      << " classes=" << stats.num_classes << '\n'
      << "class_genres=" << genres << '\n';
  WriteManifest(c, "build-dataset",
                {{"ratings", std::to_string(stats.num_ratings)},
                 {"users", std::to_string(stats.num_users)},
                 {"nodes", std::to_string(stats.num_nodes)},
                 {"edges", std::to_string(stats.num_edges)},
                 {"classes", std::to_string(stats.num_classes)},
                 {"class_genres", genres}});
  return kExitOk;
}

int MakeSynthetic(const ExperimentConfig& c, std::ostream& out) {
  SyntheticSpec spec = c.synthetic;
  spec.seed = c.seeds.front();
  const auto data = GenerateSyntheticGraph(spec);
  fs::create_directories(c.out_dir);
  WriteGraph(c.out_dir / "graph.tsv", data.graph);
  WriteLabels(c.out_dir / "labels.tsv", data.labels);
  out << "nodes=" << data.graph.num_nodes() << " edges=" << data.graph.num_edges()
      << " classes=" << data.labels.num_classes << '\n';
  WriteManifest(c, "make-synthetic",
                {{"seed", std::to_string(spec.seed)},
                 {"nodes", std::to_string(data.graph.num_nodes())},
                 {"edges", std::to_string(data.graph.num_edges())}});
  return kExitOk;
}

int InjectNoise(const ExperimentConfig& c, std::ostream& out) {
  const auto graph = ReadGraph(c.GraphPath());
  const std::uint64_t seed = c.seeds.front();
  const auto noisy = InjectNoiseEdges(graph, c.noise, seed);
  fs::create_directories(c.out_dir);
  WriteGraph(c.out_dir / "graph_noisy.tsv", noisy);
  const std::size_t added = noisy.num_edges() - graph.num_edges();
  out << "edges_before=" << graph.num_edges() << " added=" << added
      << " edges_after=" << noisy.num_edges() << '\n';
  WriteManifest(c, "inject-noise",
                {{"seed", std::to_string(seed)},
                 {"edges_before", std::to_string(graph.num_edges())},
                 {"edges_added", std::to_string(added)},
                 {"edges_after", std::to_string(noisy.num_edges())}});
  return kExitOk;
}

int Split(const ExperimentConfig& c, std::ostream& out) {
  const auto labels = ReadLabels(c.LabelsPath());
  const std::uint64_t seed = c.seeds.front();
  const auto split = SplitLabels(labels, c.labeled_fraction, seed);
  fs::create_directories(c.out_dir);
  WriteSplit(c.out_dir / "split.tsv", split);
  out << "nodes=" << split.size() << " labeled=" << split.NumLabeled()
      << " unlabeled=" << split.size() - split.NumLabeled() << '\n';
  WriteManifest(c, "split",
                {{"seed", std::to_string(seed)},
                 {"labeled", std::to_string(split.NumLabeled())}});
  return kExitOk;
}

int TrainCommand(const ExperimentConfig& c, std::ostream& out) {
  fs::create_directories(c.out_dir);
  const std::string hash = ConfigHash(c);
  std::ofstream metrics(c.out_dir / "metrics.jsonl");
  std::vector<double> acc, micro;
  for (std::uint64_t seed : c.seeds) {
    const LabeledGraph data = PrepareRun(c, seed);
    Hyperparameters hyper = c.hyper;
    hyper.seed = seed;
    const TrainResult result = Train(data.graph, data.labels, hyper);
    const fs::path dir = SeedDir(c, seed);
    fs::create_directories(dir);
    WriteGraph(dir / "graph.tsv", data.graph);
    WriteSplit(dir / "split.tsv", data.labels);
    WriteCheckpoint(dir / "checkpoint.txt", {hyper, result.params});
    WriteLossHistory(dir / "loss_history.csv", result.history);
    WritePredictions(dir / "predictions.tsv", result.predictions);
    const EvalReport report = Evaluate(result.predictions, data.labels);
    metrics << MetricsJson(report, seed, "full", hash) << '\n';
    acc.push_back(report.accuracy);
    micro.push_back(report.micro_f1);
    out << "seed=" << seed << " epochs=" << result.history.size()
        << " final_loss=" << FormatDouble(result.history.back().loss.total)
        << " acc=" << FormatDouble(report.accuracy) << '\n';
  }
  Extra extra = {{"seeds", SeedList(c)}};
  AppendSeedSummary(extra, acc, micro);
  WriteManifest(c, "train", extra);
  return kExitOk;
}

int EvaluateCommand(const ExperimentConfig& c, std::ostream& out) {
  const std::string hash = ConfigHash(c);
  std::vector<std::string> lines;
  std::vector<double> acc, micro;
  for (std::uint64_t seed : c.seeds) {
    const fs::path dir = SeedDir(c, seed);
    if (!fs::exists(dir / "checkpoint.txt")) {
      throw std::runtime_error("no trained model at " + (dir / "checkpoint.txt").string() +
                               "; run `train` first");
    }
    const Checkpoint cp = ReadCheckpoint(dir / "checkpoint.txt");
    const WeightedGraph graph = ReadGraph(dir / "graph.tsv");
    const LabelSet labels = ReadSplit(dir / "split.tsv");
    const TrainingContext ctx = MakeTrainingContext(graph, cp.hyper);
    const ForwardResult fwd = Forward(cp.params, ctx.features, ctx.rho, ctx.attention);
    const EvalReport report = Evaluate(fwd.predictions, labels);
    lines.push_back(MetricsJson(report, seed, "full", hash));
    acc.push_back(report.accuracy);
    micro.push_back(report.micro_f1);
    out << "seed=" << seed << " acc=" << FormatDouble(report.accuracy)
        << " micro_f1=" << FormatDouble(report.micro_f1)
        << " macro_f1=" << FormatDouble(report.macro_f1)
        << " weighted_f1=" << FormatDouble(report.weighted_f1) << '\n';
  }
  std::ofstream metrics(c.out_dir / "metrics.jsonl");
  for (const auto& l : lines) metrics << l << '\n';
  const auto a = Summarize(acc);
  const auto m = Summarize(micro);
  out << "mean acc=" << FormatDouble(a.mean) << " std=" << FormatDouble(a.stddev)
      << " mean micro_f1=" << FormatDouble(m.mean) << " std=" << FormatDouble(m.stddev) << '\n';
  Extra extra = {{"seeds", SeedList(c)}};
  AppendSeedSummary(extra, acc, micro);
  WriteManifest(c, "evaluate", extra);
  return kExitOk;
}

int AblateCommand(const ExperimentConfig& c, std::ostream& out) {
  fs::create_directories(c.out_dir);
  const auto table = RunAblation([&](std::uint64_t seed) { return PrepareRun(c, seed); },
                                 c.seeds, c.hyper);
  const std::string hash = ConfigHash(c);
  std::ofstream jsonl(c.out_dir / "ablation.jsonl");
  for (const auto& run : table.runs) {
    jsonl << MetricsJson(run.report, run.seed, VariantName(run.variant), hash) << '\n';
  }
  const std::string text = FormatAblationTable(table);
  std::ofstream(c.out_dir / "ablation.txt") << text;
  out << text;
  Extra extra = {{"seeds", SeedList(c)}};
  for (const auto& s : table.summary) {
    extra.emplace_back(VariantName(s.variant) + "_acc_mean", FormatDouble(s.accuracy.mean));
    extra.emplace_back(VariantName(s.variant) + "_acc_std", FormatDouble(s.accuracy.stddev));
  }
  WriteManifest(c, "ablate", extra);
  return kExitOk;
}

int ExportAttentionCommand(const ExperimentConfig& c, std::ostream& out) {
  const std::uint64_t seed = c.seeds.front();
  const LabeledGraph data = PrepareRun(c, seed);
  const NodeId n = data.graph.num_nodes();

  std::vector<NodeId> nodes = c.export_nodes;
  if (nodes.empty()) {
    if (c.export_count <= 0 || c.export_count > n) {
      throw ConfigError("export_count must lie in [1, " + std::to_string(n) + "]");
    }
    std::vector<NodeId> pool;
    for (NodeId i = 0; i < n; ++i) {
      if (data.graph.Degree(i) > 0) pool.push_back(i);
    }
    std::mt19937_64 rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(std::min<std::size_t>(pool.size(), c.export_count));
    std::sort(pool.begin(), pool.end());
    nodes = std::move(pool);
  }

  Hyperparameters full = ApplyVariant(c.hyper, Variant::kFull);
  Hyperparameters softmax = ApplyVariant(c.hyper, Variant::kWeightsOnly);
  full.seed = softmax.seed = seed;
  const auto full_run = Train(data.graph, data.labels, full);
  const auto softmax_run = Train(data.graph, data.labels, softmax);
  const auto rows = ExportAttention(full_run.params, MakeTrainingContext(data.graph, full),
                                    softmax_run.params, MakeTrainingContext(data.graph, softmax),
                                    nodes, c.export_k);
  fs::create_directories(c.out_dir);
  WriteAttentionCsv(c.out_dir / "attention.csv", rows);
  std::size_t zeros = 0;
  for (const auto& r : rows) {
    for (std::size_t s = 0; s < r.neighbors.size(); ++s) {
      if (r.neighbors[s] >= 0 && r.weights[s] == 0.0) ++zeros;
    }
  }
  out << "nodes=" << rows.size() << " k=" << c.export_k << " pruned_entries=" << zeros
      << " -> " << (c.out_dir / "attention.csv").string() << '\n';
  WriteManifest(c, "export-attention",
                {{"seed", std::to_string(seed)}, {"nodes", std::to_string(rows.size())}});
  return kExitOk;
}

struct FlagBinding {
  std::string flag;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Edge-weighted graph structure learning with sparse attention", "ewgsl");
  app.fallthrough(true);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--set", sets, "Override any config key (key=value), repeatable");

  std::vector<FlagBinding> bindings = {
      {"--seed", "seeds", "", nullptr},
      {"--alpha", "alpha", "", nullptr},
      {"--heads", "heads", "", nullptr},
      {"--eta", "eta", "", nullptr},
      {"--noise,--fraction", "noise", "", nullptr},
      {"--labeled-fraction", "labeled_fraction", "", nullptr},
      {"--out", "out", "", nullptr},
      {"--epochs", "epochs", "", nullptr},
      {"--dataset", "dataset", "", nullptr},
      {"--graph", "graph", "", nullptr},
      {"--labels", "labels", "", nullptr},
      {"--ratings", "ratings", "", nullptr},
      {"--items", "items", "", nullptr},
      {"--nodes", "export_nodes", "", nullptr},
      {"--k", "export_k", "", nullptr},
  };
  for (auto& b : bindings) {
    b.option = app.add_option(b.flag, b.value, "Sets config key '" + b.key + "'");
  }

  const std::map<std::string, std::string> commands = {
      {"build-dataset", "Build the MovieLens-100K co-rating graph"},
      {"make-synthetic", "Generate a weighted planted-partition graph"},
      {"inject-noise", "Add a fraction of random non-edges to a graph"},
      {"split", "Write a stratified labeled/unlabeled split"},
      {"train", "Train one model per seed"},
      {"evaluate", "Score trained models on their unlabeled nodes"},
      {"ablate", "Train the four attention variants on shared seeds"},
      {"export-attention", "Export final-layer attention of selected nodes"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  ExperimentConfig config;
  try {
    if (!config_path.empty()) config = LoadConfig(config_path);
    for (const auto& b : bindings) {
      if (b.option->count() > 0) SetConfigValue(config, b.key, b.value);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      SetConfigValue(config, s.substr(0, eq), s.substr(eq + 1));
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (command == "build-dataset") return BuildDataset(config, out);
    if (command == "make-synthetic") return MakeSynthetic(config, out);
    if (command == "inject-noise") return InjectNoise(config, out);
    if (command == "split") return Split(config, out);
    if (command == "train") return TrainCommand(config, out);
    if (command == "evaluate") return EvaluateCommand(config, out);
    if (command == "ablate") return AblateCommand(config, out);
    return ExportAttentionCommand(config, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace ewgsl
