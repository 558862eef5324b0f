#include "ewgsl/training.h"

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "ewgsl/io.h"

namespace ewgsl {

double CrossEntropyLossAndGrad(const Matrix& membership, const LabelSet& labels,
                               Matrix* dlogits) {
  if (labels.NumLabeled() == 0) {
    throw std::invalid_argument("cross-entropy needs at least one labeled node");
  }
  if (static_cast<std::size_t>(membership.rows()) != labels.size()) {
    throw std::invalid_argument("membership rows differ from label count");
  }
  if (dlogits != nullptr) dlogits->setZero(membership.rows(), membership.cols());
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels.labeled[i]) continue;
    const int y = labels.labels[i];
    const double m = membership(static_cast<Eigen::Index>(i), y);
    loss -= std::log(std::max(m, kLogClamp));
    if (dlogits != nullptr && m >= kLogClamp) {
      dlogits->row(static_cast<Eigen::Index>(i)) = membership.row(static_cast<Eigen::Index>(i));
      (*dlogits)(static_cast<Eigen::Index>(i), y) -= 1.0;
    }
  }
  return loss;
}

double CrossEntropyLoss(const Matrix& membership, const LabelSet& labels) {
  return CrossEntropyLossAndGrad(membership, labels, nullptr);
}

std::pair<double, double> ComputeLambda(const ImpactFactors& pattern,
                                        std::span<const double> attention,
                                        std::span<const int> predictions) {
  double intra_sum = 0.0;
  double inter_sum = 0.0;
  std::size_t intra_count = 0;
  std::size_t inter_count = 0;
  for (NodeId i = 0; i < pattern.num_nodes(); ++i) {
    for (std::size_t k = pattern.RowBegin(i); k < pattern.RowEnd(i); ++k) {
      const NodeId j = pattern.cols[k];
      if (j == i || !(attention[k] > 0.0)) continue;
      if (predictions[i] == predictions[j]) {
        intra_sum += attention[k];
        ++intra_count;
      } else {
        inter_sum += attention[k];
        ++inter_count;
      }
    }
  }
  const double lp = intra_count > 0 ? intra_sum / static_cast<double>(intra_count) : kNeutralLambda;
  const double ln = inter_count > 0 ? inter_sum / static_cast<double>(inter_count) : kNeutralLambda;
  return {lp, ln};
}

std::vector<ContrastiveSample> SampleContrastive(std::span<const int> predictions,
                                                 int negatives_per_node,
                                                 std::mt19937_64& rng) {
  int num_classes = 0;
  for (int y : predictions) num_classes = std::max(num_classes, y + 1);
  std::vector<std::vector<NodeId>> members(num_classes);
  std::vector<std::vector<NodeId>> others(num_classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    members[predictions[i]].push_back(static_cast<NodeId>(i));
    for (int c = 0; c < num_classes; ++c) {
      if (c != predictions[i]) others[c].push_back(static_cast<NodeId>(i));
    }
  }

  std::vector<ContrastiveSample> samples;
  samples.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto& same = members[predictions[i]];
    const auto& diff = others[predictions[i]];
    if (same.size() < 2 || diff.empty()) continue;
    ContrastiveSample s;
    s.anchor = static_cast<NodeId>(i);
    // Draw from the class minus the anchor by skipping over its slot.
    std::uniform_int_distribution<std::size_t> pick_pos(0, same.size() - 2);
    std::size_t r = pick_pos(rng);
    if (same[r] >= s.anchor) ++r;
    s.positive = same[r];
    std::uniform_int_distribution<std::size_t> pick_neg(0, diff.size() - 1);
    s.negatives.reserve(negatives_per_node);
    for (int k = 0; k < negatives_per_node; ++k) s.negatives.push_back(diff[pick_neg(rng)]);
    samples.push_back(std::move(s));
  }
  return samples;
}

double CosineSimilarity(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                        const Eigen::Ref<const Eigen::RowVectorXd>& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return x.dot(y) / (nx * ny);
}

namespace {

// Adds g * d cos(h_a, h_b) to rows a and b of dh.
void AccumulateCosineGrad(const Matrix& h, NodeId a, NodeId b, double g, Matrix& dh) {
  const Eigen::RowVectorXd x = h.row(a);
  const Eigen::RowVectorXd y = h.row(b);
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0 || g == 0.0) return;
  const double cos = x.dot(y) / (nx * ny);
  dh.row(a) += g * (y / (nx * ny) - cos * x / (nx * nx));
  dh.row(b) += g * (x / (nx * ny) - cos * y / (ny * ny));
}

}  // namespace

double InfoNceLoss(const Matrix& h, std::span<const ContrastiveSample> samples,
                   double lambda_p, double lambda_n, const InfoNceOptions& options,
                   Matrix* dh) {
  if (!(options.temperature > 0.0)) throw std::invalid_argument("temperature must be > 0");
  if (dh != nullptr) dh->setZero(h.rows(), h.cols());
  if (samples.empty()) return 0.0;
  const double t = options.temperature;
  const double scale = 1.0 / static_cast<double>(samples.size());
  double total = 0.0;

  std::vector<double> logits;
  std::vector<NodeId> targets;
  for (const ContrastiveSample& s : samples) {
    if (s.negatives.empty()) throw std::invalid_argument("anchor without negatives");
    const Eigen::RowVectorXd anchor = h.row(s.anchor);
    const double pos_sim = CosineSimilarity(anchor, h.row(s.positive));

    logits.clear();
    targets.clear();
    for (NodeId k : s.negatives) {
      logits.push_back(std::log(lambda_n) + CosineSimilarity(anchor, h.row(k)) / t);
      targets.push_back(k);
    }
    if (options.include_positive_in_denominator) {
      logits.push_back(std::log(lambda_p) + pos_sim / t);
      targets.push_back(s.positive);
    }
    double mx = logits.front();
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : logits) sum += std::exp(v - mx);
    const double log_denominator = mx + std::log(sum);
    total += -(std::log(lambda_p) + pos_sim / t - log_denominator);

    if (dh != nullptr) {
      AccumulateCosineGrad(h, s.anchor, s.positive, -scale / t, *dh);
      for (std::size_t q = 0; q < logits.size(); ++q) {
        const double weight = std::exp(logits[q] - log_denominator);
        AccumulateCosineGrad(h, s.anchor, targets[q], scale * weight / t, *dh);
      }
    }
  }
  return total * scale;
}

TrainingContext MakeTrainingContext(const WeightedGraph& graph,
                                    const Hyperparameters& hyper) {
  TrainingContext ctx;
  ctx.graph = AssignSelfLoopWeights(graph, hyper.self_loop_mode);
  ctx.rho = hyper.weighted_attention ? BuildImpactFactors(ctx.graph)
                                     : UniformImpactFactors(ctx.graph);
  ctx.features = InputFeatures::Identity(graph.num_nodes());
  ctx.attention = {hyper.alpha, hyper.entmax_tol, hyper.entmax_max_iter};
  return ctx;
}

namespace {

InfoNceOptions NceOptions(const Hyperparameters& hyper) {
  return {hyper.temperature, hyper.include_positive_in_denominator};
}

LossBreakdown LossFromForward(const ForwardResult& forward, const LabelSet& labels,
                              const Hyperparameters& hyper,
                              std::span<const ContrastiveSample> samples, double lambda_p,
                              double lambda_n, Objective objective, Matrix* dlogits) {
  LossBreakdown loss;
  loss.lambda_p = lambda_p;
  loss.lambda_n = lambda_n;
  loss.cross_entropy = CrossEntropyLossAndGrad(forward.membership, labels, dlogits);
  if (objective == Objective::kFull) {
    Matrix dh;
    loss.contrastive = InfoNceLoss(forward.logits, samples, lambda_p, lambda_n,
                                   NceOptions(hyper), dlogits != nullptr ? &dh : nullptr);
    if (dlogits != nullptr) *dlogits += hyper.eta * dh;
    loss.total = TotalLoss(loss.cross_entropy, loss.contrastive, hyper.eta);
  } else {
    loss.total = loss.cross_entropy;
  }
  return loss;
}

}  // namespace

LossBreakdown EvaluateLoss(const ModelParams& params, const TrainingContext& ctx,
                           const LabelSet& labels, const Hyperparameters& hyper,
                           std::span<const ContrastiveSample> samples, double lambda_p,
                           double lambda_n, Objective objective) {
  ForwardResult forward = Forward(params, ctx.features, ctx.rho, ctx.attention);
  return LossFromForward(forward, labels, hyper, samples, lambda_p, lambda_n, objective,
                         nullptr);
}

ModelParams Backward(const ModelParams& params, const ForwardResult& forward,
                     const TrainingContext& ctx, const LabelSet& labels,
                     const Hyperparameters& hyper,
                     std::span<const ContrastiveSample> samples, double lambda_p,
                     double lambda_n, Objective objective, LossBreakdown* loss) {
  Matrix dlogits;
  LossBreakdown l = LossFromForward(forward, labels, hyper, samples, lambda_p, lambda_n,
                                    objective, &dlogits);
  if (loss != nullptr) *loss = l;
  ModelParams grad =
      BackwardFromLogits(params, forward, ctx.features, ctx.rho, ctx.attention, dlogits);

  const auto names = ParameterBlockNames(grad);
  const auto blocks = ParameterBlocks(grad);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t k = 0; k < blocks[b].size(); ++k) {
      if (!std::isfinite(blocks[b][k])) {
        throw std::runtime_error("non-finite gradient at " + names[b] + " entry " +
                                 std::to_string(k));
      }
    }
  }
  return grad;
}

AdamOptimizer::AdamOptimizer(const ModelParams& shape, double learning_rate, double beta1,
                             double beta2, double epsilon)
    : lr_(learning_rate),
      beta1_(beta1),
      beta2_(beta2),
      eps_(epsilon),
      m_(ZerosLike(shape)),
      v_(ZerosLike(shape)) {}

void AdamOptimizer::Step(ModelParams& params, ModelParams& gradient) {
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  auto p = ParameterBlocks(params);
  auto g = ParameterBlocks(gradient);
  auto m = ParameterBlocks(m_);
  auto v = ParameterBlocks(v_);
  for (std::size_t b = 0; b < p.size(); ++b) {
    for (std::size_t k = 0; k < p[b].size(); ++k) {
      m[b][k] = beta1_ * m[b][k] + (1.0 - beta1_) * g[b][k];
      v[b][k] = beta2_ * v[b][k] + (1.0 - beta2_) * g[b][k] * g[b][k];
      const double mhat = m[b][k] / c1;
      const double vhat = v[b][k] / c2;
      p[b][k] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

double LabeledAccuracy(std::span<const int> predictions, const LabelSet& labels) {
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels.IsLabeled(static_cast<NodeId>(i))) continue;
    ++total;
    if (predictions[i] == labels.labels[i]) ++correct;
  }
  return total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

TrainResult Train(const WeightedGraph& graph, const LabelSet& labels,
                  const Hyperparameters& hyper, const TrainOptions& options) {
  hyper.Validate();
  if (labels.size() != static_cast<std::size_t>(graph.num_nodes())) {
    throw std::invalid_argument("label count differs from node count");
  }
  if (labels.NumLabeled() == 0) throw std::invalid_argument("no labeled nodes to train on");

  const TrainingContext ctx = MakeTrainingContext(graph, hyper);
  TrainResult result;
  result.params = InitModelParams(ctx.features.dim(), hyper.hidden_dims, labels.num_classes,
                                  hyper.heads, hyper.seed);
  AdamOptimizer adam(result.params, hyper.learning_rate);
  // Separate stream so the sampler never perturbs initialization.
  std::mt19937_64 sample_rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);

  int streak = 0;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    ForwardResult forward = Forward(result.params, ctx.features, ctx.rho, ctx.attention);
    const auto [lp, ln] = ComputeLambda(ctx.rho, forward.layers.back().attention.HeadAverage(),
                                        forward.predictions);
    std::vector<ContrastiveSample> samples;
    if (options.objective == Objective::kFull) {
      samples = SampleContrastive(forward.predictions, hyper.negatives_per_node, sample_rng);
    }
    EpochRecord record;
    record.epoch = epoch;
    ModelParams grad = Backward(result.params, forward, ctx, labels, hyper, samples, lp, ln,
                                options.objective, &record.loss);
    if (!std::isfinite(record.loss.total)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               ": L_C=" + std::to_string(record.loss.cross_entropy) +
                               " L_I=" + std::to_string(record.loss.contrastive));
    }
    record.train_accuracy = LabeledAccuracy(forward.predictions, labels);
    if (!result.history.empty() &&
        std::abs(record.loss.total - result.history.back().loss.total) < options.stop_tolerance) {
      ++streak;
    } else {
      streak = 0;
    }
    result.history.push_back(record);
    adam.Step(result.params, grad);
    if (streak >= options.patience) break;
  }

  result.final_forward = Forward(result.params, ctx.features, ctx.rho, ctx.attention);
  result.predictions = result.final_forward.predictions;
  return result;
}

void WriteLossHistory(const std::filesystem::path& path,
                      std::span<const EpochRecord> history) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << "epoch,L,L_C,L_I,lambda_p,lambda_n,train_acc\n";
  for (const EpochRecord& r : history) {
    out << r.epoch << ',' << FormatDouble(r.loss.total) << ','
        << FormatDouble(r.loss.cross_entropy) << ',' << FormatDouble(r.loss.contrastive) << ','
        << FormatDouble(r.loss.lambda_p) << ',' << FormatDouble(r.loss.lambda_n) << ','
        << FormatDouble(r.train_accuracy) << '\n';
  }
}

}  // namespace ewgsl
