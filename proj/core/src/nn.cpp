#include "taaco/nn.hpp"

#include <cmath>

namespace taaco {

void EncoderConfig::validate() const {
  if (model_dim <= 0 || layers <= 0 || heads <= 0 || ffn_dim <= 0) {
    raise(ErrorCode::InvalidArgument, "encoder dimensions must be positive");
  }
  if (model_dim % heads != 0) {
    raise(ErrorCode::InvalidArgument, "model_dim must be divisible by heads");
  }
}

Tensor xavier_uniform(int64_t fan_in, int64_t fan_out, Rng& rng) {
  Tensor w(fan_in, fan_out);
  double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  double* d = w.data();
  for (int64_t i = 0; i < w.size(); ++i) d[i] = rng.uniform(-limit, limit);
  return w;
}

namespace {
Tensor zeros_row(int64_t n) { return Tensor(1, n); }
Tensor ones_row(int64_t n) {
  Tensor t(1, n);
  t.fill(1.0);
  return t;
}
}  // namespace

AttentionParams AttentionParams::init(int dim, Rng& rng, const std::string& prefix) {
  AttentionParams p;
  p.wq = Parameter(prefix + ".wq", xavier_uniform(dim, dim, rng));
  p.bq = Parameter(prefix + ".bq", zeros_row(dim));
  p.wk = Parameter(prefix + ".wk", xavier_uniform(dim, dim, rng));
  p.bk = Parameter(prefix + ".bk", zeros_row(dim));
  p.wv = Parameter(prefix + ".wv", xavier_uniform(dim, dim, rng));
  p.bv = Parameter(prefix + ".bv", zeros_row(dim));
  p.wo = Parameter(prefix + ".wo", xavier_uniform(dim, dim, rng));
  p.bo = Parameter(prefix + ".bo", zeros_row(dim));
  return p;
}

void AttentionParams::collect(std::vector<Parameter*>& out) {
  for (Parameter* p : {&wq, &bq, &wk, &bk, &wv, &bv, &wo, &bo}) out.push_back(p);
}

EncoderLayerParams EncoderLayerParams::init(const EncoderConfig& config, Rng& rng,
                                            const std::string& prefix) {
  EncoderLayerParams p;
  p.attn = AttentionParams::init(config.model_dim, rng, prefix + ".attn");
  p.ln1_gamma = Parameter(prefix + ".ln1.gamma", ones_row(config.model_dim));
  p.ln1_beta = Parameter(prefix + ".ln1.beta", zeros_row(config.model_dim));
  p.ff1_w = Parameter(prefix + ".ff1.w", xavier_uniform(config.model_dim, config.ffn_dim, rng));
  p.ff1_b = Parameter(prefix + ".ff1.b", zeros_row(config.ffn_dim));
  p.ff2_w = Parameter(prefix + ".ff2.w", xavier_uniform(config.ffn_dim, config.model_dim, rng));
  p.ff2_b = Parameter(prefix + ".ff2.b", zeros_row(config.model_dim));
  p.ln2_gamma = Parameter(prefix + ".ln2.gamma", ones_row(config.model_dim));
  p.ln2_beta = Parameter(prefix + ".ln2.beta", zeros_row(config.model_dim));
  return p;
}

void EncoderLayerParams::collect(std::vector<Parameter*>& out) {
  attn.collect(out);
  for (Parameter* p : {&ln1_gamma, &ln1_beta, &ff1_w, &ff1_b, &ff2_w, &ff2_b, &ln2_gamma,
                       &ln2_beta}) {
    out.push_back(p);
  }
}

EncoderParams EncoderParams::init(const EncoderConfig& config, Rng& rng,
                                  const std::string& prefix) {
  config.validate();
  EncoderParams p;
  p.config = config;
  p.layers.reserve(static_cast<size_t>(config.layers));
  for (int l = 0; l < config.layers; ++l) {
    p.layers.push_back(EncoderLayerParams::init(config, rng, prefix + ".layer" + std::to_string(l)));
  }
  return p;
}

void EncoderParams::collect(std::vector<Parameter*>& out) {
  for (auto& layer : layers) layer.collect(out);
}

AttentionGraphOut multi_head_self_attention_graph(Graph& g, Graph::Var x, AttentionParams& params,
                                                  int heads) {
  const Tensor& X = g.value(x);
  int64_t d = X.cols();
  if (X.rows() < 1) raise(ErrorCode::ShapeMismatch, "attention needs at least one token");
  if (d % heads != 0) raise(ErrorCode::ShapeMismatch, "model dim not divisible by heads");
  int64_t hd = d / heads;

  Graph::Var q = g.add_row(g.matmul(x, g.leaf(params.wq)), g.leaf(params.bq));
  Graph::Var k = g.add_row(g.matmul(x, g.leaf(params.wk)), g.leaf(params.bk));
  Graph::Var v = g.add_row(g.matmul(x, g.leaf(params.wv)), g.leaf(params.bv));

  double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Graph::Var> head_outputs;
  std::vector<Graph::Var> head_attention;
  head_outputs.reserve(static_cast<size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Graph::Var qh = g.slice_cols(q, h * hd, hd);
    Graph::Var kh = g.slice_cols(k, h * hd, hd);
    Graph::Var vh = g.slice_cols(v, h * hd, hd);
    Graph::Var scores = g.scale(g.matmul_nt(qh, kh), scale);
    Graph::Var attn = g.softmax_rows(scores);
    head_attention.push_back(attn);
    head_outputs.push_back(g.matmul(attn, vh));
  }
  Graph::Var concat = g.concat_cols(head_outputs);
  Graph::Var out = g.add_row(g.matmul(concat, g.leaf(params.wo)), g.leaf(params.bo));
  return {out, std::move(head_attention)};
}

EncoderGraphOut encoder_forward_graph(Graph& g, Graph::Var x, EncoderParams& params) {
  params.config.validate();
  if (g.value(x).cols() != params.config.model_dim) {
    raise(ErrorCode::ShapeMismatch, "encoder input width " + g.value(x).shape_string() +
                                        " != model_dim " + std::to_string(params.config.model_dim));
  }
  Graph::Var h = x;
  std::vector<Graph::Var> last_attention;
  for (auto& layer : params.layers) {
    auto attn = multi_head_self_attention_graph(g, h, layer.attn, params.config.heads);
    last_attention = attn.head_attention;
    Graph::Var res1 = g.add(h, attn.output);
    Graph::Var norm1 =
        g.layer_norm_rows(res1, g.leaf(layer.ln1_gamma), g.leaf(layer.ln1_beta));
    Graph::Var ff =
        g.add_row(g.matmul(g.relu(g.add_row(g.matmul(norm1, g.leaf(layer.ff1_w)),
                                            g.leaf(layer.ff1_b))),
                           g.leaf(layer.ff2_w)),
                  g.leaf(layer.ff2_b));
    Graph::Var res2 = g.add(norm1, ff);
    h = g.layer_norm_rows(res2, g.leaf(layer.ln2_gamma), g.leaf(layer.ln2_beta));
  }
  return {h, std::move(last_attention)};
}

namespace {

Tensor stack_attention(const Graph& g, const std::vector<Graph::Var>& heads) {
  int64_t h = static_cast<int64_t>(heads.size());
  int64_t n = g.value(heads[0]).rows();
  Tensor out(std::vector<int64_t>{h, n, n});
  for (int64_t i = 0; i < h; ++i) {
    const Tensor& a = g.value(heads[static_cast<size_t>(i)]);
    for (int64_t r = 0; r < n; ++r) {
      for (int64_t c = 0; c < n; ++c) out[i * n * n + r * n + c] = a.at(r, c);
    }
  }
  return out;
}

}  // namespace

AttentionResult multi_head_self_attention(const Tensor& x, AttentionParams& params, int heads) {
  Graph g;
  auto out = multi_head_self_attention_graph(g, g.constant(x), params, heads);
  return {g.value(out.output), stack_attention(g, out.head_attention)};
}

EncoderResult encoder_forward(const Tensor& x, EncoderParams& params) {
  Graph g;
  auto out = encoder_forward_graph(g, g.constant(x), params);
  return {g.value(out.features), stack_attention(g, out.final_attention)};
}

double softmax_cross_entropy(const Tensor& logits, int label) {
  int64_t k = logits.size();
  if (label < 0 || label >= k) raise(ErrorCode::IndexOutOfRange, "label out of range");
  double mx = logits[0];
  for (int64_t j = 1; j < k; ++j) mx = std::max(mx, logits[j]);
  double sum = 0.0;
  for (int64_t j = 0; j < k; ++j) sum += std::exp(logits[j] - mx);
  return std::log(sum) + mx - logits[label];
}

std::vector<double> softmax(const Tensor& logits) {
  int64_t k = logits.size();
  double mx = logits[0];
  for (int64_t j = 1; j < k; ++j) mx = std::max(mx, logits[j]);
  std::vector<double> p(static_cast<size_t>(k));
  double sum = 0.0;
  for (int64_t j = 0; j < k; ++j) {
    p[static_cast<size_t>(j)] = std::exp(logits[j] - mx);
    sum += p[static_cast<size_t>(j)];
  }
  for (double& x : p) x /= sum;
  return p;
}

AdamState::AdamState(std::span<Parameter* const> params, AdamConfig config) : config_(config) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Parameter* p : params) {
    m_.emplace_back(p->value.shape());
    v_.emplace_back(p->value.shape());
  }
}

void AdamState::step(std::span<Parameter* const> params) {
  if (params.size() != m_.size()) {
    raise(ErrorCode::ShapeMismatch, "adam state was built for a different parameter list");
  }
  ++step_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    if (!p.value.same_shape(m_[i])) {
      raise(ErrorCode::ShapeMismatch, "adam moment shape mismatch for " + p.name);
    }
    double* w = p.value.data();
    double* g = p.grad.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    for (int64_t j = 0; j < p.value.size(); ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      w[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
      g[j] = 0.0;
    }
  }
}

double finite_difference_check(const std::function<double()>& loss_fn,
                               const std::function<void()>& grad_fn,
                               std::span<Parameter* const> params, int probes, double h,
                               uint64_t seed) {
  if (h <= 0.0) raise(ErrorCode::InvalidArgument, "finite difference step must be > 0");
  if (probes <= 0) raise(ErrorCode::InvalidArgument, "probe count must be > 0");

  for (Parameter* p : params) p->zero_grad();
  grad_fn();

  int64_t total = 0;
  for (const Parameter* p : params) total += p->value.size();
  if (total == 0) raise(ErrorCode::InvalidArgument, "no parameters to probe");

  Rng rng(seed);
  double max_rel = 0.0;
  for (int probe = 0; probe < probes; ++probe) {
    int64_t flat = static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(total)));
    Parameter* target = nullptr;
    for (Parameter* p : params) {
      if (flat < p->value.size()) {
        target = p;
        break;
      }
      flat -= p->value.size();
    }
    double original = target->value[flat];
    target->value[flat] = original + h;
    double plus = loss_fn();
    target->value[flat] = original - h;
    double minus = loss_fn();
    target->value[flat] = original;

    double numeric = (plus - minus) / (2.0 * h);
    double analytic = target->grad[flat];
    double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-8});
    max_rel = std::max(max_rel, std::fabs(analytic - numeric) / denom);
  }
  return max_rel;
}

}  // namespace taaco
