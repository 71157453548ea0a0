#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "taaco/autodiff.hpp"
#include "taaco/rng.hpp"
#include "taaco/tensor.hpp"

namespace taaco {

struct EncoderConfig {
  int model_dim = 96;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 384;
  uint64_t seed = 0;

  int head_dim() const { return model_dim / heads; }
  void validate() const;
};

// Xavier/Glorot uniform init for a [fan_in, fan_out] weight matrix.
Tensor xavier_uniform(int64_t fan_in, int64_t fan_out, Rng& rng);

struct AttentionParams {
  Parameter wq, bq, wk, bk, wv, bv, wo, bo;

  static AttentionParams init(int dim, Rng& rng, const std::string& prefix);
  void collect(std::vector<Parameter*>& out);
};

struct EncoderLayerParams {
  AttentionParams attn;
  Parameter ln1_gamma, ln1_beta;
  Parameter ff1_w, ff1_b, ff2_w, ff2_b;
  Parameter ln2_gamma, ln2_beta;

  static EncoderLayerParams init(const EncoderConfig& config, Rng& rng, const std::string& prefix);
  void collect(std::vector<Parameter*>& out);
};

struct EncoderParams {
  EncoderConfig config;
  std::vector<EncoderLayerParams> layers;

  static EncoderParams init(const EncoderConfig& config, Rng& rng,
                            const std::string& prefix = "encoder");
  void collect(std::vector<Parameter*>& out);
};

// --------------------------------------------------------------------------
// Graph builders (differentiable). Attention matrices are exposed as graph
// vars so losses can flow through them.
// --------------------------------------------------------------------------

struct AttentionGraphOut {
  Graph::Var output;                     // [n, d]
  std::vector<Graph::Var> head_attention;  // H vars of [n, n]
};

AttentionGraphOut multi_head_self_attention_graph(Graph& g, Graph::Var x, AttentionParams& params,
                                                  int heads);

struct EncoderGraphOut {
  Graph::Var features;                     // [n, d]
  std::vector<Graph::Var> final_attention;  // last layer's H vars of [n, n]
};

EncoderGraphOut encoder_forward_graph(Graph& g, Graph::Var x, EncoderParams& params);

// --------------------------------------------------------------------------
// Evaluated entry points.
// --------------------------------------------------------------------------

struct AttentionResult {
  Tensor output;     // [n, d]
  Tensor attention;  // [H, n, n]
};

AttentionResult multi_head_self_attention(const Tensor& x, AttentionParams& params, int heads);

struct EncoderResult {
  Tensor features;         // [n, d]
  Tensor final_attention;  // [H, n, n]
};

EncoderResult encoder_forward(const Tensor& x, EncoderParams& params);

// -log softmax(logits)[label]; logits may be [k] or [1,k].
double softmax_cross_entropy(const Tensor& logits, int label);

std::vector<double> softmax(const Tensor& logits);

// --------------------------------------------------------------------------
// Adam
// --------------------------------------------------------------------------

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Standard bias-corrected Adam over a fixed parameter list. Gradients are
/// zeroed after each step.
class AdamState {
 public:
  AdamState(std::span<Parameter* const> params, AdamConfig config = {});

  void step(std::span<Parameter* const> params);

  int64_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  int64_t step_ = 0;
};

// --------------------------------------------------------------------------
// Gradient checking
// --------------------------------------------------------------------------

// Compares analytic gradients against central differences at `probes`
// randomly chosen parameter coordinates. `grad_fn` must populate param grads
// (they are zeroed first); `loss_fn` must be the matching pure forward pass.
// Returns the max relative error with denominator max(|analytic|, |numeric|,
// 1e-8). h must be > 0.
double finite_difference_check(const std::function<double()>& loss_fn,
                               const std::function<void()>& grad_fn,
                               std::span<Parameter* const> params, int probes, double h,
                               uint64_t seed);

}  // namespace taaco
