#ifndef EWGSL_TRAINING_H_
#define EWGSL_TRAINING_H_

#include <filesystem>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "ewgsl/dataset.h"
#include "ewgsl/graph.h"
#include "ewgsl/model.h"

namespace ewgsl {

// Floor applied to membership probabilities before taking logs.
inline constexpr double kLogClamp = 1e-12;
// Value used for lambda_p / lambda_n when the corresponding pair set is empty.
inline constexpr double kNeutralLambda = 1.0;

struct LossBreakdown {
  double cross_entropy = 0.0;
  double contrastive = 0.0;
  double lambda_p = kNeutralLambda;
  double lambda_n = kNeutralLambda;
  double total = 0.0;
};

struct ContrastiveSample {
  NodeId anchor = 0;
  NodeId positive = 0;
  std::vector<NodeId> negatives;
};

// -sum over labeled nodes of log m_{i, y_i}, log clamped at log(1e-12).
// Throws when no node is labeled.
double CrossEntropyLoss(const Matrix& membership, const LabelSet& labels);

// Same value; also writes dL/dlogits (zero rows for unlabeled nodes).
double CrossEntropyLossAndGrad(const Matrix& membership, const LabelSet& labels,
                               Matrix* dlogits);

// Mean head-averaged attention over off-diagonal pattern entries with
// e'_ij > 0, split by whether predicted labels agree (lambda_p) or not
// (lambda_n). An empty set yields kNeutralLambda.
std::pair<double, double> ComputeLambda(const ImpactFactors& pattern,
                                        std::span<const double> attention,
                                        std::span<const int> predictions);

// One positive (same predicted class, not the anchor) and `negatives_per_node`
// negatives (different predicted class, with replacement) per node, uniform.
// Nodes without a same-class partner or without any other-class node are
// skipped.
std::vector<ContrastiveSample> SampleContrastive(std::span<const int> predictions,
                                                 int negatives_per_node,
                                                 std::mt19937_64& rng);

// Cosine similarity; 0 when either vector is zero.
double CosineSimilarity(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        const Eigen::Ref<const Eigen::RowVectorXd>& y);

struct InfoNceOptions {
  double temperature = 0.5;
  bool include_positive_in_denominator = false;
};

// Weighted InfoNCE averaged over the given anchors:
//   -log[ lp * exp(sim(i, pos)/t) / sum_{k in negatives} ln * exp(sim(i, k)/t) ]
// Returns 0 for an empty sample list. When `dh` is non-null it receives
// dL/dh (same shape as h).
double InfoNceLoss(const Matrix& h, std::span<const ContrastiveSample> samples,
                   double lambda_p, double lambda_n, const InfoNceOptions& options,
                   Matrix* dh = nullptr);

inline double TotalLoss(double cross_entropy, double contrastive, double eta) {
  return cross_entropy + eta * contrastive;
}

// Everything the forward and backward passes need besides the parameters.
struct TrainingContext {
  WeightedGraph graph;  // with self-loop weights
  ImpactFactors rho;
  InputFeatures features;
  AttentionOptions attention;
};

// Self-loops, impact factors (weighted or uniform) and identity features.
TrainingContext MakeTrainingContext(const WeightedGraph& graph,
                                    const Hyperparameters& hyper);

enum class Objective {
  kFull,              // L_C + eta * L_I
  kCrossEntropyOnly,  // L_C; no contrastive sampling
};

// Loss for fixed samples and lambdas.
LossBreakdown EvaluateLoss(const ModelParams& params, const TrainingContext& ctx,
                           const LabelSet& labels, const Hyperparameters& hyper,
                           std::span<const ContrastiveSample> samples, double lambda_p,
                           double lambda_n, Objective objective = Objective::kFull);

// Exact gradient of the total loss for fixed samples and lambdas, given the
// forward pass at `params`. Throws std::runtime_error naming the parameter
// block if any entry is non-finite.
ModelParams Backward(const ModelParams& params, const ForwardResult& forward,
                     const TrainingContext& ctx, const LabelSet& labels,
                     const Hyperparameters& hyper,
                     std::span<const ContrastiveSample> samples, double lambda_p,
                     double lambda_n, Objective objective = Objective::kFull,
                     LossBreakdown* loss = nullptr);

class AdamOptimizer {
 public:
  AdamOptimizer(const ModelParams& shape, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);

  void Step(ModelParams& params, ModelParams& gradient);

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_ = 0;
  ModelParams m_;
  ModelParams v_;
};

struct EpochRecord {
  int epoch = 0;
  LossBreakdown loss;
  double train_accuracy = 0.0;
};

struct TrainOptions {
  Objective objective = Objective::kFull;
  // Stop once |L_t - L_{t-1}| < stop_tolerance for `patience` epochs in a row.
  double stop_tolerance = 1e-6;
  int patience = 10;
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochRecord> history;
  ForwardResult final_forward;
  std::vector<int> predictions;
};

// Full-batch training. Each epoch runs the forward pass, updates the
// predicted labels, recomputes lambdas and contrastive samples, evaluates
// the loss, backpropagates and takes one Adam step.
TrainResult Train(const WeightedGraph& graph, const LabelSet& labels,
                  const Hyperparameters& hyper, const TrainOptions& options = {});

// Training accuracy over labeled nodes.
double LabeledAccuracy(std::span<const int> predictions, const LabelSet& labels);

// CSV with header `epoch,L,L_C,L_I,lambda_p,lambda_n,train_acc`.
void WriteLossHistory(const std::filesystem::path& path,
                      std::span<const EpochRecord> history);

}  // namespace ewgsl

#endif  // EWGSL_TRAINING_H_
