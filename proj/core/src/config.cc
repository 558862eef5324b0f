#include "ewgsl/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "ewgsl/io.h"

namespace ewgsl {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ToDouble(const std::string& key, const std::string& v) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

long long ToInt(const std::string& key, const std::string& v) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t ToSeed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool ToBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config key '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<std::string> SplitList(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
std::string JoinList(const std::vector<T>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(items[i]);
  }
  return out;
}

std::string DatasetName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kSynthetic:
      return "synthetic";
    case DatasetKind::kMl100k:
      return "ml100k";
    case DatasetKind::kTsv:
      return "tsv";
  }
  return "tsv";
}

}  // namespace

std::filesystem::path ExperimentConfig::GraphPath() const {
  return graph_path.empty() ? out_dir / "graph.tsv" : graph_path;
}

std::filesystem::path ExperimentConfig::LabelsPath() const {
  return labels_path.empty() ? out_dir / "labels.tsv" : labels_path;
}

void SetHyperparameter(Hyperparameters& h, const std::string& key, const std::string& v) {
  if (key == "alpha") {
    h.alpha = ToDouble(key, v);
  } else if (key == "heads") {
    h.heads = static_cast<int>(ToInt(key, v));
  } else if (key == "eta") {
    h.eta = ToDouble(key, v);
  } else if (key == "temperature") {
    h.temperature = ToDouble(key, v);
  } else if (key == "lr") {
    h.learning_rate = ToDouble(key, v);
  } else if (key == "epochs") {
    h.epochs = static_cast<int>(ToInt(key, v));
  } else if (key == "hidden") {
    h.hidden_dims.clear();
    for (const auto& d : SplitList(v)) h.hidden_dims.push_back(static_cast<int>(ToInt(key, d)));
  } else if (key == "self_loop_mode") {
    try {
      h.self_loop_mode = ParseSelfLoopMode(v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "negatives") {
    h.negatives_per_node = static_cast<int>(ToInt(key, v));
  } else if (key == "model_seed") {
    h.seed = ToSeed(key, v);
  } else if (key == "weighted_attention") {
    h.weighted_attention = ToBool(key, v);
  } else if (key == "include_positive") {
    h.include_positive_in_denominator = ToBool(key, v);
  } else if (key == "entmax_tol") {
    h.entmax_tol = ToDouble(key, v);
  } else if (key == "entmax_max_iter") {
    h.entmax_max_iter = static_cast<int>(ToInt(key, v));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

std::map<std::string, std::string> HyperparametersToMap(const Hyperparameters& h) {
  return {
      {"alpha", FormatDouble(h.alpha)},
      {"heads", std::to_string(h.heads)},
      {"eta", FormatDouble(h.eta)},
      {"temperature", FormatDouble(h.temperature)},
      {"lr", FormatDouble(h.learning_rate)},
      {"epochs", std::to_string(h.epochs)},
      {"hidden", JoinList(h.hidden_dims)},
      {"self_loop_mode", SelfLoopModeName(h.self_loop_mode)},
      {"negatives", std::to_string(h.negatives_per_node)},
      {"model_seed", std::to_string(h.seed)},
      {"weighted_attention", h.weighted_attention ? "true" : "false"},
      {"include_positive", h.include_positive_in_denominator ? "true" : "false"},
      {"entmax_tol", FormatDouble(h.entmax_tol)},
      {"entmax_max_iter", std::to_string(h.entmax_max_iter)},
  };
}

void SetConfigValue(ExperimentConfig& c, const std::string& key, const std::string& v) {
  if (key == "dataset") {
    if (v == "tsv") {
      c.dataset = DatasetKind::kTsv;
    } else if (v == "synthetic") {
      c.dataset = DatasetKind::kSynthetic;
    } else if (v == "ml100k") {
      c.dataset = DatasetKind::kMl100k;
    } else {
      throw ConfigError("dataset must be tsv, synthetic or ml100k, got '" + v + "'");
    }
  } else if (key == "graph") {
    c.graph_path = v;
  } else if (key == "labels") {
    c.labels_path = v;
  } else if (key == "ratings") {
    c.ratings_path = v;
  } else if (key == "items") {
    c.items_path = v;
  } else if (key == "ml100k_max_classes") {
    c.ml100k_max_classes = static_cast<int>(ToInt(key, v));
  } else if (key == "synthetic_nodes") {
    c.synthetic.num_nodes = static_cast<NodeId>(ToInt(key, v));
  } else if (key == "synthetic_classes") {
    c.synthetic.num_classes = static_cast<int>(ToInt(key, v));
  } else if (key == "synthetic_intra_p") {
    c.synthetic.intra_p = ToDouble(key, v);
  } else if (key == "synthetic_inter_p") {
    c.synthetic.inter_p = ToDouble(key, v);
  } else if (key == "synthetic_intra_weight_mean") {
    c.synthetic.intra_weight_mean = ToDouble(key, v);
  } else if (key == "synthetic_inter_weight_mean") {
    c.synthetic.inter_weight_mean = ToDouble(key, v);
  } else if (key == "noise") {
    c.noise = ToDouble(key, v);
    if (!(c.noise >= 0.0 && c.noise <= 1.0)) throw ConfigError("noise must lie in [0, 1]");
  } else if (key == "labeled_fraction") {
    c.labeled_fraction = ToDouble(key, v);
    if (!(c.labeled_fraction > 0.0 && c.labeled_fraction < 1.0)) {
      throw ConfigError("labeled_fraction must lie in (0, 1)");
    }
  } else if (key == "seeds" || key == "seed") {
    c.seeds.clear();
    for (const auto& s : SplitList(v)) c.seeds.push_back(ToSeed(key, s));
    if (c.seeds.empty()) throw ConfigError("seeds must list at least one seed");
  } else if (key == "out") {
    c.out_dir = v;
  } else if (key == "export_nodes") {
    c.export_nodes.clear();
    for (const auto& s : SplitList(v)) c.export_nodes.push_back(static_cast<NodeId>(ToInt(key, s)));
  } else if (key == "export_count") {
    c.export_count = static_cast<int>(ToInt(key, v));
  } else if (key == "export_k") {
    c.export_k = static_cast<int>(ToInt(key, v));
  } else {
    SetHyperparameter(c.hyper, key, v);
    try {
      c.hyper.Validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid hyperparameter: ") + e.what());
    }
  }
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    try {
      SetConfigValue(config, Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str());
}

std::map<std::string, std::string> ConfigToMap(const ExperimentConfig& c) {
  auto m = HyperparametersToMap(c.hyper);
  m["dataset"] = DatasetName(c.dataset);
  m["graph"] = c.graph_path.string();
  m["labels"] = c.labels_path.string();
  m["ratings"] = c.ratings_path.string();
  m["items"] = c.items_path.string();
  m["ml100k_max_classes"] = std::to_string(c.ml100k_max_classes);
  m["synthetic_nodes"] = std::to_string(c.synthetic.num_nodes);
  m["synthetic_classes"] = std::to_string(c.synthetic.num_classes);
  m["synthetic_intra_p"] = FormatDouble(c.synthetic.intra_p);
  m["synthetic_inter_p"] = FormatDouble(c.synthetic.inter_p);
  m["synthetic_intra_weight_mean"] = FormatDouble(c.synthetic.intra_weight_mean);
  m["synthetic_inter_weight_mean"] = FormatDouble(c.synthetic.inter_weight_mean);
  m["noise"] = FormatDouble(c.noise);
  m["labeled_fraction"] = FormatDouble(c.labeled_fraction);
  m["seeds"] = JoinList(c.seeds);
  m["out"] = c.out_dir.string();
  m["export_nodes"] = JoinList(c.export_nodes);
  m["export_count"] = std::to_string(c.export_count);
  m["export_k"] = std::to_string(c.export_k);
  return m;
}

std::string CanonicalConfigText(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : ConfigToMap(config)) out += k + " = " + v + "\n";
  return out;
}

std::string ConfigHash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : CanonicalConfigText(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabeledGraph PrepareRun(const ExperimentConfig& config, std::uint64_t seed) {
  LabeledGraph data;
  switch (config.dataset) {
    case DatasetKind::kSynthetic: {
      SyntheticSpec spec = config.synthetic;
      spec.seed = seed;
      data = GenerateSyntheticGraph(spec);
      break;
    }
    case DatasetKind::kMl100k: {
      Ml100kOptions options;
      options.max_classes = config.ml100k_max_classes;
      data = BuildMl100kGraph(config.ratings_path, config.items_path, options);
      break;
    }
    case DatasetKind::kTsv:
      data.graph = ReadGraph(config.GraphPath());
      data.labels = ReadLabels(config.LabelsPath());
      if (data.labels.size() != static_cast<std::size_t>(data.graph.num_nodes())) {
        throw std::runtime_error("label file covers " + std::to_string(data.labels.size()) +
                                 " nodes but the graph has " +
                                 std::to_string(data.graph.num_nodes()));
      }
      break;
  }
  if (config.noise > 0.0) data.graph = InjectNoiseEdges(data.graph, config.noise, seed);
  data.labels = SplitLabels(data.labels, config.labeled_fraction, seed);
  return data;
}

}  // namespace ewgsl
