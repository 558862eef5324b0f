// Central finite-difference check of the analytic training gradient.
#ifndef EWGSL_TESTS_GRADCHECK_H_
#define EWGSL_TESTS_GRADCHECK_H_

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>
#include <vector>

#include "ewgsl/dataset.h"
#include "ewgsl/training.h"
#include "oracles.h"

namespace ewgsl::testing {

struct GradCheckResult {
  std::size_t coordinates = 0;
  std::size_t within_tolerance = 0;
  double worst_relative_error = 0.0;
  double fraction() const {
    return coordinates ? static_cast<double>(within_tolerance) / coordinates : 0.0;
  }
};

// Relative error with a small absolute floor so coordinates whose true
// derivative is zero are judged by their absolute agreement.
inline double RelativeError(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

struct GradCheckProblem {
  TrainingContext ctx;
  LabelSet labels;
  Hyperparameters hyper;
  ModelParams params;
  std::vector<ContrastiveSample> samples;
  double lambda_p = 1.0;
  double lambda_n = 1.0;
};

// Seeded random problem: n nodes, c classes, one hidden layer, `heads` heads,
// half of the nodes labeled, contrastive samples drawn from current predictions.
inline GradCheckProblem MakeGradCheckProblem(int n, int c, int hidden, int heads, double alpha,
                                             double eta, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradCheckProblem p;
  const auto graph = oracle::RandomGraph(n, 0.3, 6, rng);
  p.hyper.alpha = alpha;
  p.hyper.eta = eta;
  p.hyper.heads = heads;
  p.hyper.hidden_dims = {hidden};
  p.hyper.negatives_per_node = 3;
  p.hyper.entmax_tol = 1e-13;
  p.hyper.entmax_max_iter = 200;
  p.ctx = MakeTrainingContext(graph, p.hyper);
  p.labels.num_classes = c;
  for (int i = 0; i < n; ++i) {
    p.labels.labels.push_back(static_cast<int>(rng() % c));
    p.labels.labeled.push_back(i % 2 == 0);
  }
  p.params = InitModelParams(n, p.hyper.hidden_dims, c, heads, seed);
  // Scale attention vectors up so entmax rows are sparse and the check
  // exercises the pruned regime, and spread beta away from one.
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto& layer : p.params.layers) {
    for (auto& h : layer.heads) {
      h.att_src *= 4.0;
      h.att_dst *= 4.0;
    }
    for (int k = 0; k < layer.beta.size(); ++k) layer.beta[k] = u(rng);
  }
  const auto fwd = Forward(p.params, p.ctx.features, p.ctx.rho, p.ctx.attention);
  std::tie(p.lambda_p, p.lambda_n) = ComputeLambda(
      p.ctx.rho, fwd.layers.back().attention.HeadAverage(), fwd.predictions);
  // Predictions from a random model may collapse onto one class; sample from
  // a fixed balanced assignment so the contrastive term is always present.
  std::vector<int> pseudo(n);
  for (int i = 0; i < n; ++i) pseudo[i] = i % c;
  p.samples = SampleContrastive(pseudo, p.hyper.negatives_per_node, rng);
  return p;
}

inline GradCheckResult CheckGradients(const GradCheckProblem& p, double step = 1e-4,
                                      double tolerance = 1e-3) {
  const auto fwd = Forward(p.params, p.ctx.features, p.ctx.rho, p.ctx.attention);
  ModelParams grad = Backward(p.params, fwd, p.ctx, p.labels, p.hyper, p.samples, p.lambda_p,
                              p.lambda_n);
  ModelParams probe = p.params;
  auto blocks = ParameterBlocks(probe);
  auto grads = ParameterBlocks(grad);
  GradCheckResult r;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    for (std::size_t k = 0; k < blocks[b].size(); ++k) {
      const double saved = blocks[b][k];
      blocks[b][k] = saved + step;
      const double up = EvaluateLoss(probe, p.ctx, p.labels, p.hyper, p.samples, p.lambda_p,
                                     p.lambda_n).total;
      blocks[b][k] = saved - step;
      const double down = EvaluateLoss(probe, p.ctx, p.labels, p.hyper, p.samples, p.lambda_p,
                                       p.lambda_n).total;
      blocks[b][k] = saved;
      const double err = RelativeError(grads[b][k], (up - down) / (2 * step));
      ++r.coordinates;
      if (err <= tolerance) ++r.within_tolerance;
      r.worst_relative_error = std::max(r.worst_relative_error, err);
    }
  }
  return r;
}

}  // namespace ewgsl::testing

#endif  // EWGSL_TESTS_GRADCHECK_H_
