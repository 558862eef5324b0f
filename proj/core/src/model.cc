#include "ewgsl/model.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace ewgsl {

void Hyperparameters::Validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
  if (!(alpha >= 1.0 && alpha <= 2.0)) fail("alpha must lie in [1, 2]");
  if (heads < 1) fail("heads must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) fail("eta must be >= 0");
  if (!(temperature > 0.0)) fail("temperature must be > 0");
  if (!(learning_rate > 0.0)) fail("learning rate must be > 0");
  if (epochs < 1) fail("epochs must be >= 1");
  if (hidden_dims.empty()) fail("hidden_dims must be non-empty");
  for (int d : hidden_dims) {
    if (d < 1) fail("hidden dims must be positive");
  }
  if (negatives_per_node < 1) fail("negatives_per_node must be >= 1");
  if (!(entmax_tol > 0.0)) fail("entmax tolerance must be > 0");
  if (entmax_max_iter < 1) fail("entmax max iterations must be >= 1");
}

ModelParams InitModelParams(int input_dim, std::span<const int> hidden_dims,
                            int num_classes, int heads, std::uint64_t seed) {
  if (input_dim < 1 || num_classes < 1 || heads < 1) {
    throw std::invalid_argument("model dims and head count must be positive");
  }
  std::mt19937_64 rng(seed);
  std::vector<int> dims = {input_dim};
  dims.insert(dims.end(), hidden_dims.begin(), hidden_dims.end());
  dims.push_back(num_classes);

  ModelParams params;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const int in = dims[l];
    const int out = dims[l + 1];
    LayerParams layer;
    layer.activation = l + 2 == dims.size() ? Activation::kIdentity : Activation::kElu;
    layer.beta = Vector::Ones(heads);
    const double w_limit = std::sqrt(6.0 / (in + out));
    const double a_limit = std::sqrt(6.0 / (1 + 2 * out));
    std::uniform_real_distribution<double> w_dist(-w_limit, w_limit);
    std::uniform_real_distribution<double> a_dist(-a_limit, a_limit);
    for (int k = 0; k < heads; ++k) {
      HeadParams head;
      head.weight.resize(out, in);
      for (Eigen::Index r = 0; r < head.weight.rows(); ++r) {
        for (Eigen::Index c = 0; c < head.weight.cols(); ++c) head.weight(r, c) = w_dist(rng);
      }
      head.att_src.resize(out);
      head.att_dst.resize(out);
      for (int r = 0; r < out; ++r) head.att_src[r] = a_dist(rng);
      for (int r = 0; r < out; ++r) head.att_dst[r] = a_dist(rng);
      layer.heads.push_back(std::move(head));
    }
    params.layers.push_back(std::move(layer));
  }
  return params;
}

ModelParams ZerosLike(const ModelParams& params) {
  ModelParams out = params;
  for (auto block : ParameterBlocks(out)) std::fill(block.begin(), block.end(), 0.0);
  return out;
}

std::vector<std::span<double>> ParameterBlocks(ModelParams& params) {
  std::vector<std::span<double>> blocks;
  for (LayerParams& layer : params.layers) {
    for (HeadParams& head : layer.heads) {
      blocks.emplace_back(head.weight.data(), static_cast<std::size_t>(head.weight.size()));
      blocks.emplace_back(head.att_src.data(), static_cast<std::size_t>(head.att_src.size()));
      blocks.emplace_back(head.att_dst.data(), static_cast<std::size_t>(head.att_dst.size()));
    }
    blocks.emplace_back(layer.beta.data(), static_cast<std::size_t>(layer.beta.size()));
  }
  return blocks;
}

std::vector<std::string> ParameterBlockNames(const ModelParams& params) {
  std::vector<std::string> names;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const std::string layer = "layer " + std::to_string(l);
    for (std::size_t k = 0; k < params.layers[l].heads.size(); ++k) {
      const std::string head = layer + " head " + std::to_string(k);
      names.push_back(head + " W");
      names.push_back(head + " a_src");
      names.push_back(head + " a_dst");
    }
    names.push_back(layer + " beta");
  }
  return names;
}

std::size_t NumParameters(const ModelParams& params) {
  std::size_t total = 0;
  for (const LayerParams& layer : params.layers) {
    for (const HeadParams& head : layer.heads) {
      total += head.weight.size() + head.att_src.size() + head.att_dst.size();
    }
    total += layer.beta.size();
  }
  return total;
}

std::vector<double> AttentionState::HeadAverage() const {
  if (heads.empty()) return {};
  std::vector<double> avg(heads.front().weights.size(), 0.0);
  for (const HeadAttention& h : heads) {
    for (std::size_t k = 0; k < avg.size(); ++k) avg[k] += h.weights[k];
  }
  for (double& v : avg) v /= static_cast<double>(heads.size());
  return avg;
}

namespace {

inline double LeakyRelu(double x) { return x > 0.0 ? x : kLeakyReluSlope * x; }

void ApplyActivation(Activation act, const Matrix& u, Matrix& out) {
  if (act == Activation::kIdentity) {
    out = u;
  } else {
    out = u.unaryExpr([](double x) { return x > 0.0 ? x : std::expm1(x); });
  }
}

// Raw scores from already-projected features Z.
std::vector<double> ScoresFromProjection(const HeadParams& head, const Matrix& z,
                                         const ImpactFactors& rho,
                                         std::vector<double>* pre_leaky) {
  const Vector src = z * head.att_src;
  const Vector dst = z * head.att_dst;
  std::vector<double> raw(rho.num_entries());
  if (pre_leaky != nullptr) pre_leaky->resize(rho.num_entries());
  for (NodeId i = 0; i < rho.num_nodes(); ++i) {
    for (std::size_t k = rho.RowBegin(i); k < rho.RowEnd(i); ++k) {
      const double s = src[i] + dst[rho.cols[k]];
      if (pre_leaky != nullptr) (*pre_leaky)[k] = s;
      raw[k] = rho.rho[k] * LeakyRelu(s);
    }
  }
  return raw;
}

Matrix Project(const HeadParams& head, const InputFeatures& features, const Matrix* h) {
  if (h != nullptr) return *h * head.weight.transpose();
  if (features.dense) return *features.dense * head.weight.transpose();
  return head.weight.transpose();
}

Matrix Aggregate(const std::vector<double>& weights, const Matrix& z,
                 const ImpactFactors& pattern) {
  Matrix u = Matrix::Zero(z.rows(), z.cols());
  for (NodeId i = 0; i < pattern.num_nodes(); ++i) {
    for (std::size_t k = pattern.RowBegin(i); k < pattern.RowEnd(i); ++k) {
      if (weights[k] != 0.0) u.row(i) += weights[k] * z.row(pattern.cols[k]);
    }
  }
  return u;
}

void CheckDims(const LayerParams& layer, Eigen::Index in_cols, NodeId rows,
               const ImpactFactors& rho) {
  if (layer.heads.empty()) throw std::invalid_argument("layer has no heads");
  if (layer.in_dim() != in_cols) {
    throw std::invalid_argument("dimension mismatch: layer expects " +
                                std::to_string(layer.in_dim()) + " input features, got " +
                                std::to_string(in_cols));
  }
  if (rows != rho.num_nodes()) {
    throw std::invalid_argument("dimension mismatch: features have " + std::to_string(rows) +
                                " rows but the graph has " +
                                std::to_string(rho.num_nodes()) + " nodes");
  }
  if (layer.beta.size() != layer.num_heads()) {
    throw std::invalid_argument("dimension mismatch: beta length differs from head count");
  }
}

// Shared forward for one layer; `h` null means the input features.
LayerCache RunLayer(const LayerParams& layer, const InputFeatures& features,
                    const Matrix* h, const ImpactFactors& rho,
                    const AttentionOptions& options) {
  const Eigen::Index in_cols = h != nullptr ? h->cols() : features.dim();
  const auto rows = static_cast<NodeId>(h != nullptr ? h->rows() : features.num_nodes);
  CheckDims(layer, in_cols, rows, rho);

  const int heads = layer.num_heads();
  LayerCache cache;
  cache.output = Matrix::Zero(rows, layer.out_dim());
  for (int k = 0; k < heads; ++k) {
    const HeadParams& head = layer.heads[k];
    Matrix z = Project(head, features, h);
    std::vector<double> pre;
    HeadAttention att = SparsifyAttention(ScoresFromProjection(head, z, rho, &pre), rho, options);
    Matrix u = Aggregate(att.weights, z, rho);
    Matrix a;
    ApplyActivation(layer.activation, u, a);
    cache.output += (layer.beta[k] / heads) * a;
    cache.projected.push_back(std::move(z));
    cache.scores.push_back(std::move(pre));
    cache.pre_activation.push_back(std::move(u));
    cache.head_output.push_back(std::move(a));
    cache.attention.heads.push_back(std::move(att));
  }
  return cache;
}

}  // namespace

std::vector<double> AttentionScores(const LayerParams& layer, int head, const Matrix& h,
                                    const ImpactFactors& rho) {
  CheckDims(layer, h.cols(), static_cast<NodeId>(h.rows()), rho);
  if (head < 0 || head >= layer.num_heads()) throw std::out_of_range("head index");
  const HeadParams& p = layer.heads[head];
  return ScoresFromProjection(p, h * p.weight.transpose(), rho, nullptr);
}

HeadAttention SparsifyAttention(std::vector<double> raw, const ImpactFactors& pattern,
                                const AttentionOptions& options) {
  HeadAttention out;
  out.weights.resize(raw.size());
  out.tau.resize(pattern.num_nodes());
  for (NodeId i = 0; i < pattern.num_nodes(); ++i) {
    const std::size_t b = pattern.RowBegin(i);
    const std::size_t len = pattern.RowEnd(i) - b;
    out.tau[i] = EntmaxRow({raw.data() + b, len}, options.alpha,
                           {out.weights.data() + b, len}, options.tol, options.max_iter);
  }
  out.raw = std::move(raw);
  return out;
}

LayerOutput LayerForward(const LayerParams& layer, const Matrix& h, const ImpactFactors& rho,
                         const AttentionOptions& options) {
  InputFeatures unused;
  LayerCache cache = RunLayer(layer, unused, &h, rho, options);
  return {std::move(cache.output), std::move(cache.attention)};
}

Matrix RowSoftmax(const Matrix& logits) {
  Matrix m(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index j = 0; j < logits.cols(); ++j) {
      m(i, j) = std::exp(logits(i, j) - mx);
      sum += m(i, j);
    }
    m.row(i) /= sum;
  }
  return m;
}

std::vector<int> InferLabels(const Matrix& membership) {
  std::vector<int> out(membership.rows());
  for (Eigen::Index i = 0; i < membership.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < membership.cols(); ++j) {
      if (membership(i, j) > membership(i, best)) best = static_cast<int>(j);
    }
    out[i] = best;
  }
  return out;
}

ForwardResult Forward(const ModelParams& params, const InputFeatures& features,
                      const ImpactFactors& rho, const AttentionOptions& options) {
  if (params.layers.empty()) throw std::invalid_argument("model has no layers");
  ForwardResult result;
  const Matrix* h = nullptr;
  for (const LayerParams& layer : params.layers) {
    result.layers.push_back(RunLayer(layer, features, h, rho, options));
    h = &result.layers.back().output;
  }
  result.logits = result.layers.back().output;
  result.membership = RowSoftmax(result.logits);
  result.predictions = InferLabels(result.membership);
  return result;
}

ModelParams BackwardFromLogits(const ModelParams& params, const ForwardResult& forward,
                               const InputFeatures& features, const ImpactFactors& rho,
                               const AttentionOptions& options, const Matrix& dlogits) {
  ModelParams grad = ZerosLike(params);
  Matrix g = dlogits;  // dL/d(layer output)
  for (std::size_t l = params.layers.size(); l-- > 0;) {
    const LayerParams& layer = params.layers[l];
    const LayerCache& cache = forward.layers[l];
    LayerParams& dlayer = grad.layers[l];
    const int heads = layer.num_heads();
    const bool first = l == 0;
    const Matrix* input = first ? (features.dense ? &*features.dense : nullptr)
                                : &forward.layers[l - 1].output;
    Matrix dinput;
    if (!first) dinput = Matrix::Zero(input->rows(), input->cols());

    for (int k = 0; k < heads; ++k) {
      const HeadParams& head = layer.heads[k];
      HeadParams& dhead = dlayer.heads[k];
      const Matrix& z = cache.projected[k];
      const Matrix& a = cache.head_output[k];
      const HeadAttention& att = cache.attention.heads[k];

      dlayer.beta[k] = g.cwiseProduct(a).sum() / heads;
      Matrix du = (layer.beta[k] / heads) * g;
      if (layer.activation == Activation::kElu) {
        const Matrix& u = cache.pre_activation[k];
        for (Eigen::Index i = 0; i < du.rows(); ++i) {
          for (Eigen::Index c = 0; c < du.cols(); ++c) {
            if (u(i, c) <= 0.0) du(i, c) *= a(i, c) + 1.0;
          }
        }
      }

      Matrix dz = Matrix::Zero(z.rows(), z.cols());
      std::vector<double> dweights(rho.num_entries(), 0.0);
      for (NodeId i = 0; i < rho.num_nodes(); ++i) {
        for (std::size_t e = rho.RowBegin(i); e < rho.RowEnd(i); ++e) {
          const NodeId j = rho.cols[e];
          dweights[e] = du.row(i).dot(z.row(j));
          if (att.weights[e] != 0.0) dz.row(j) += att.weights[e] * du.row(i);
        }
      }

      Vector dsrc = Vector::Zero(z.rows());
      Vector ddst = Vector::Zero(z.rows());
      std::vector<double> draw(rho.num_entries());
      for (NodeId i = 0; i < rho.num_nodes(); ++i) {
        const std::size_t b = rho.RowBegin(i);
        const std::size_t len = rho.RowEnd(i) - b;
        EntmaxVjpRow({att.weights.data() + b, len}, options.alpha,
                     {dweights.data() + b, len}, {draw.data() + b, len});
        for (std::size_t e = b; e < b + len; ++e) {
          const double s = cache.scores[k][e];
          const double ds = draw[e] * rho.rho[e] * (s > 0.0 ? 1.0 : kLeakyReluSlope);
          dsrc[i] += ds;
          ddst[rho.cols[e]] += ds;
        }
      }
      dhead.att_src = z.transpose() * dsrc;
      dhead.att_dst = z.transpose() * ddst;
      dz.noalias() += dsrc * head.att_src.transpose();
      dz.noalias() += ddst * head.att_dst.transpose();

      if (input != nullptr) {
        dhead.weight = dz.transpose() * *input;
      } else {
        dhead.weight = dz.transpose();
      }
      if (!first) dinput.noalias() += dz * head.weight;
    }
    if (!first) g = std::move(dinput);
  }
  return grad;
}

}  // namespace ewgsl
