#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "taaco/concepts.hpp"
#include "taaco/domain.hpp"
#include "taaco/embedding.hpp"
#include "taaco/llm_client.hpp"
#include "taaco/nn.hpp"
#include "taaco/score_cache.hpp"
#include "taaco/scoring.hpp"

namespace taaco {

struct ModelConfig {
  EncoderConfig encoder;  // model_dim = 3 * embed_dim
  int lm_dim = kDefaultEmbeddingDim;

  // NoConcepts replaces concept tokens with one language-embedded row per
  // task component (the representation ablation).
  enum class Variant { Full, NoConcepts };
  Variant variant = Variant::Full;

  int embed_dim() const { return encoder.model_dim / 3; }
  void validate() const;
};

/// Input to the transformer: one row per concept entry and state variable plus
/// the trailing <OUT> row. index_map describes what each input row refers to
/// (it is the explanation space for this input).
struct TokenizedInput {
  Tensor tokens;                         // [n+1, model_dim]
  std::vector<ExplanationItem> index_map;  // n entries, aligned to rows 0..n-1
};

// Explanation space for the standard tokenization: rep entries in order, then
// state variables in space order.
std::vector<ExplanationItem> token_refs(const ScoredRepresentation& rep, const StateSpace& space);

struct TrainingPoint {
  std::shared_ptr<const TaskDescription> task;
  std::shared_ptr<const ScoredRepresentation> rep;
  StateVector state;
  AdaptationLabel label = AdaptationLabel::DoNow;
  std::optional<std::vector<double>> explanation_targets;  // over the n input tokens
};

// Realizes a feedback sample as n_aug concrete training states: constrained
// variables fixed per the sample's constraint, the rest drawn uniformly.
// Targets mark tokens named by the explanation and state tokens bound by the
// constraint; samples with neither carry no targets. token_space overrides the
// default explanation space (used by the NoConcepts ablation).
std::vector<TrainingPoint> expand_feedback(
    const FeedbackSample& sample, const StateSpace& space,
    std::shared_ptr<const TaskDescription> task, std::shared_ptr<const ScoredRepresentation> rep,
    int n_aug, Rng& rng, const std::vector<ExplanationItem>* token_space = nullptr);

// p_i = 1 - exp(-w_i)
std::vector<double> explanation_probabilities(const std::vector<double>& attention);

// Index-map entry at the argmax explanation probability; ties break to the
// lowest index. n must be >= 1.
ExplanationItem extract_explanation(const TokenizedInput& tokens,
                                    const std::vector<double>& attention);

struct TrainConfig {
  int epochs = 1700;
  double lr = 1e-4;
  double lambda = 20.0;
  int log_every = 0;  // epochs between stderr progress lines; 0 = silent
};

struct TrainResult {
  std::vector<double> loss_history;  // per-epoch mean loss
};

struct ForwardResult {
  Tensor logits;                  // [1, 4]
  std::vector<double> attention;  // mean over heads, <OUT> row to each input token
  double out_self_attention = 0.0;
};

struct Prediction {
  AdaptationLabel label = AdaptationLabel::DoNow;
  std::array<double, kNumLabels> probabilities{};
  std::optional<ExplanationItem> explanation;
  std::vector<double> attention;
};

/// The personalization model: learned token embeddings and projections, a
/// small transformer encoder, and a 4-way classification head, with the
/// <OUT>-row attention doubling as the explanation signal.
class TaacoModel {
 public:
  TaacoModel(ModelConfig config, StateSpace space, ConceptVocabulary vocab,
             std::shared_ptr<const EmbeddingProvider> embedder);

  const ModelConfig& config() const { return config_; }
  const StateSpace& state_space() const { return space_; }
  const ConceptVocabulary& vocabulary() const { return vocab_; }
  const std::string& embedder_id() const { return embedder_id_; }

  // Canonical parameter order; fixed across save/load and optimizer state.
  std::vector<Parameter*> parameters();

  // Explanation space for this model's tokenization of (rep | task, space).
  std::vector<ExplanationItem> explanation_space(const ScoredRepresentation& rep,
                                                 const TaskDescription& task) const;

  TokenizedInput assemble_tokens(const ScoredRepresentation& rep, const StateVector& state,
                                 const TaskDescription* task = nullptr);

  ForwardResult forward(const TokenizedInput& tokens);

  double compute_loss(std::span<const TrainingPoint> points, double lambda = 20.0);

  // Populates parameter gradients for the mean loss over points (grads are
  // accumulated; caller zeroes them). Returns the loss.
  double loss_and_gradients(std::span<const TrainingPoint> points, double lambda);

  TrainResult train(std::span<const TrainingPoint> points, const TrainConfig& config);

  Prediction predict(const TaskDescription& task, const StateVector& state,
                     CompletionClient& client, ScoreCache& cache,
                     ScoreMode mode = ScoreMode::Strict);
  Prediction predict_from_rep(const ScoredRepresentation& rep, const StateVector& state,
                              const TaskDescription* task = nullptr);

  // Raw weight access for checkpointing.
  struct Weights {
    Parameter type_embed;   // [5, e]
    Parameter state_embed;  // [|S|, e]
    Parameter rho_c_w, rho_c_b;
    Parameter rho_m_w1, rho_m_b1, rho_m_w2, rho_m_b2;
    Parameter out_token;  // [1, 3e]
    EncoderParams encoder;
    Parameter head_w, head_b;
  };
  Weights& weights() { return weights_; }

 public:
  struct TokenPlan;  // compact per-point tokenization recipe (internal)

 private:
  // Validates rep/state consistency and resolves vocabulary indices.
  TokenPlan plan_tokens(const ScoredRepresentation* rep, const TaskDescription* task,
                        const StateVector& state) const;

  static Graph::Var assemble_graph(Graph& g, const TokenPlan& plan, Weights& w,
                                   const Tensor& concept_lm, ModelConfig::Variant variant);

  struct GraphOut {
    Graph::Var logits;
    Graph::Var input_attention;  // [1, n], mean over heads
    int64_t out_row = 0;
  };
  GraphOut build_graph(Graph& g, const TokenPlan& plan);

  Graph::Var point_loss(Graph& g, const TokenPlan& plan, const TrainingPoint& point,
                        double lambda);

  ModelConfig config_;
  StateSpace space_;
  ConceptVocabulary vocab_;
  std::shared_ptr<const EmbeddingProvider> embedder_;
  std::string embedder_id_;
  Weights weights_;
  Tensor concept_lm_;  // [num concepts, lm_dim], vocab order, fixed
};

}  // namespace taaco
