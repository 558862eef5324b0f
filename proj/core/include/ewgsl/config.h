#ifndef EWGSL_CONFIG_H_
#define EWGSL_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ewgsl/dataset.h"
#include "ewgsl/model.h"

namespace ewgsl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class DatasetKind { kTsv, kSynthetic, kMl100k };

struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::kTsv;
  // kTsv inputs; empty means <out>/graph.tsv and <out>/labels.tsv.
  std::filesystem::path graph_path;
  std::filesystem::path labels_path;
  // kMl100k inputs.
  std::filesystem::path ratings_path;
  std::filesystem::path items_path;
  int ml100k_max_classes = 9;
  // kSynthetic; the seed is taken from the run seed.
  SyntheticSpec synthetic;

  Hyperparameters hyper;
  double noise = 0.0;
  double labeled_fraction = 0.1;
  std::vector<std::uint64_t> seeds = {0};
  std::filesystem::path out_dir = "out";

  // export-attention
  std::vector<NodeId> export_nodes;
  int export_count = 5;
  int export_k = 10;

  std::filesystem::path GraphPath() const;
  std::filesystem::path LabelsPath() const;
};

// Flat `key = value` text; '#' starts a comment. Unknown keys and values of
// the wrong type raise ConfigError.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);

// Applies one `key=value` override with the same validation as the file.
void SetConfigValue(ExperimentConfig& config, const std::string& key,
                    const std::string& value);

// Canonical key/value view of the config, sorted by key.
std::map<std::string, std::string> ConfigToMap(const ExperimentConfig& config);
std::string CanonicalConfigText(const ExperimentConfig& config);

// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string ConfigHash(const ExperimentConfig& config);

// Hyperparameter subset as `key=value`, shared with the checkpoint format.
std::map<std::string, std::string> HyperparametersToMap(const Hyperparameters& hyper);
void SetHyperparameter(Hyperparameters& hyper, const std::string& key,
                       const std::string& value);

// The graph and split used for one seed: base dataset, injected noise edges
// and a stratified labeled/unlabeled split, all seeded by `seed`.
LabeledGraph PrepareRun(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace ewgsl

#endif  // EWGSL_CONFIG_H_
