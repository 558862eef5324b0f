#ifndef EWGSL_MODEL_H_
#define EWGSL_MODEL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ewgsl/entmax.h"
#include "ewgsl/graph.h"

namespace ewgsl {

// Node-major dense matrix: one row per node.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Activation { kIdentity, kElu };

struct Hyperparameters {
  double alpha = 1.5;
  int heads = 6;
  double eta = 0.1;
  double temperature = 0.5;
  double learning_rate = 0.005;
  int epochs = 100;
  std::vector<int> hidden_dims = {256, 128};
  SelfLoopMode self_loop_mode = SelfLoopMode::kMax;
  int negatives_per_node = 5;
  std::uint64_t seed = 0;
  // false replaces every impact factor by 1 (weight-blind attention).
  bool weighted_attention = true;
  // Adds the positive pair to the InfoNCE denominator (standard form).
  bool include_positive_in_denominator = false;
  double entmax_tol = kEntmaxDefaultTol;
  int entmax_max_iter = kEntmaxDefaultMaxIter;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;

  friend bool operator==(const Hyperparameters&, const Hyperparameters&) = default;
};

struct HeadParams {
  Matrix weight;  // out_dim x in_dim
  Vector att_src;  // scores the receiving node i
  Vector att_dst;  // scores the neighbor j
};

struct LayerParams {
  std::vector<HeadParams> heads;
  Vector beta;  // one learnable weight per head
  Activation activation = Activation::kElu;

  int in_dim() const { return static_cast<int>(heads.front().weight.cols()); }
  int out_dim() const { return static_cast<int>(heads.front().weight.rows()); }
  int num_heads() const { return static_cast<int>(heads.size()); }
};

struct ModelParams {
  std::vector<LayerParams> layers;
};

// Glorot-uniform W and attention vectors, beta = 1. Layer dims run
// input_dim -> hidden_dims... -> num_classes; ELU on hidden layers, identity
// on the output layer.
ModelParams InitModelParams(int input_dim, std::span<const int> hidden_dims,
                            int num_classes, int heads, std::uint64_t seed);

ModelParams ZerosLike(const ModelParams& params);

// Flat views over every trainable array, in a fixed order. Adam and the
// finite-difference checks iterate these.
std::vector<std::span<double>> ParameterBlocks(ModelParams& params);
std::vector<std::string> ParameterBlockNames(const ModelParams& params);
std::size_t NumParameters(const ModelParams& params);

// Node input features. Without a dense matrix the features are the one-hot
// identity, which lets the first layer read W columns directly.
struct InputFeatures {
  NodeId num_nodes = 0;
  std::optional<Matrix> dense;

  static InputFeatures Identity(NodeId n) { return {n, std::nullopt}; }
  static InputFeatures Dense(Matrix m) {
    const auto n = static_cast<NodeId>(m.rows());
    return {n, std::move(m)};
  }
  int dim() const { return dense ? static_cast<int>(dense->cols()) : num_nodes; }
};

struct AttentionOptions {
  double alpha = 1.5;
  double tol = kEntmaxDefaultTol;
  int max_iter = kEntmaxDefaultMaxIter;
};

inline constexpr double kLeakyReluSlope = 0.2;

// Per-head attention over the ImpactFactors pattern: `raw` holds e_ij,
// `weights` the row-normalized e'_ij, `tau` the per-row threshold.
struct HeadAttention {
  std::vector<double> raw;
  std::vector<double> weights;
  std::vector<double> tau;
};

struct AttentionState {
  std::vector<HeadAttention> heads;

  // Mean of e'_ij over heads, aligned with the pattern entries.
  std::vector<double> HeadAverage() const;
};

// e_ij = rho_ij * LeakyReLU(a_src . W h_i + a_dst . W h_j) for every entry of
// the pattern (self entry included).
std::vector<double> AttentionScores(const LayerParams& layer, int head,
                                    const Matrix& h, const ImpactFactors& rho);

// Row-wise alpha-entmax of raw scores laid out on `pattern`.
HeadAttention SparsifyAttention(std::vector<double> raw, const ImpactFactors& pattern,
                                const AttentionOptions& options);

struct LayerOutput {
  Matrix h;
  AttentionState attention;
};

LayerOutput LayerForward(const LayerParams& layer, const Matrix& h,
                         const ImpactFactors& rho, const AttentionOptions& options);

struct LayerCache {
  std::vector<Matrix> projected;       // Z_k = H W_k^T
  std::vector<std::vector<double>> scores;  // pre-LeakyReLU score per entry
  std::vector<Matrix> pre_activation;  // U_k
  std::vector<Matrix> head_output;     // sigma(U_k)
  AttentionState attention;
  Matrix output;
};

struct ForwardResult {
  std::vector<LayerCache> layers;
  Matrix logits;      // n x c, the final representation matrix
  Matrix membership;  // row-wise softmax of logits
  std::vector<int> predictions;
};

ForwardResult Forward(const ModelParams& params, const InputFeatures& features,
                      const ImpactFactors& rho, const AttentionOptions& options);

// Reverse pass from dL/dlogits through every layer of `forward`.
ModelParams BackwardFromLogits(const ModelParams& params, const ForwardResult& forward,
                               const InputFeatures& features, const ImpactFactors& rho,
                               const AttentionOptions& options, const Matrix& dlogits);

Matrix RowSoftmax(const Matrix& logits);

// argmax per row; ties go to the lowest class index.
std::vector<int> InferLabels(const Matrix& membership);

}  // namespace ewgsl

#endif  // EWGSL_MODEL_H_
