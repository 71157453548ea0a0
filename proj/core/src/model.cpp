#include "taaco/model.hpp"

#include <cmath>
#include <iostream>
#include <map>

#include "taaco/text.hpp"

namespace taaco {

void ModelConfig::validate() const {
  encoder.validate();
  if (encoder.model_dim % 3 != 0) {
    raise(ErrorCode::InvalidArgument,
          "model_dim must be divisible by 3 (type|concept|score embeddings)");
  }
  if (lm_dim <= 0) raise(ErrorCode::InvalidArgument, "lm_dim must be positive");
}

std::vector<ExplanationItem> token_refs(const ScoredRepresentation& rep, const StateSpace& space) {
  std::vector<ExplanationItem> refs;
  refs.reserve(rep.entries.size() + space.size());
  for (const auto& entry : rep.entries) {
    refs.push_back(ExplanationItem::for_component(entry.component, entry.type, entry.concept_text));
  }
  for (const auto& name : space.variables) refs.push_back(ExplanationItem::for_state(name));
  return refs;
}

std::vector<double> explanation_probabilities(const std::vector<double>& attention) {
  std::vector<double> p(attention.size());
  for (size_t i = 0; i < attention.size(); ++i) p[i] = 1.0 - std::exp(-attention[i]);
  return p;
}

ExplanationItem extract_explanation(const TokenizedInput& tokens,
                                    const std::vector<double>& attention) {
  if (tokens.index_map.empty() || attention.empty()) {
    raise(ErrorCode::InvalidArgument, "cannot extract an explanation from zero input tokens");
  }
  // 1-exp(-w) is strictly increasing, so the argmax of the attention weights
  // is the argmax of the explanation probabilities.
  size_t best = 0;
  for (size_t i = 1; i < attention.size(); ++i) {
    if (attention[i] > attention[best]) best = i;
  }
  return tokens.index_map[best];
}

std::vector<TrainingPoint> expand_feedback(const FeedbackSample& sample, const StateSpace& space,
                                           std::shared_ptr<const TaskDescription> task,
                                           std::shared_ptr<const ScoredRepresentation> rep,
                                           int n_aug, Rng& rng,
                                           const std::vector<ExplanationItem>* token_space) {
  if (n_aug <= 0) raise(ErrorCode::InvalidArgument, "n_aug must be positive");

  std::vector<ExplanationItem> default_refs;
  if (!token_space) {
    default_refs = token_refs(*rep, space);
    token_space = &default_refs;
  }

  // Constraint bindings resolved to state indices up front.
  std::vector<std::optional<bool>> fixed(space.size());
  if (sample.constraint) {
    for (const auto& [name, value] : sample.constraint->bindings) {
      auto idx = space.index_of(name);
      if (!idx) raise(ErrorCode::UnknownVariable, "constraint variable '" + name + "'");
      fixed[*idx] = value;
    }
  }

  std::optional<std::vector<double>> targets;
  if (sample.has_explanation() || sample.has_constraint()) {
    std::vector<double> t(token_space->size(), 0.0);
    std::vector<ExplanationItem> items;
    if (sample.explanation) items = *sample.explanation;
    if (sample.constraint) {
      for (const auto& [name, value] : sample.constraint->bindings) {
        (void)value;
        items.push_back(ExplanationItem::for_state(name));
      }
    }
    for (size_t i = 0; i < token_space->size(); ++i) {
      for (const auto& item : items) {
        if (item.matches((*token_space)[i])) {
          t[i] = 1.0;
          break;
        }
      }
    }
    targets = std::move(t);
  }

  std::vector<TrainingPoint> points;
  points.reserve(static_cast<size_t>(n_aug));
  for (int a = 0; a < n_aug; ++a) {
    TrainingPoint point;
    point.task = task;
    point.rep = rep;
    point.label = sample.adaptation;
    point.explanation_targets = targets;
    point.state.values.resize(space.size());
    for (size_t i = 0; i < space.size(); ++i) {
      point.state.values[i] = fixed[i] ? *fixed[i] : rng.coin();
    }
    points.push_back(std::move(point));
  }
  return points;
}

// ---------------------------------------------------------------------------
// TaacoModel
// ---------------------------------------------------------------------------

struct TaacoModel::TokenPlan {
  struct ConceptRow {
    int type_slot = 0;
    int lm_row = 0;
    double m = 0.0;
  };
  std::vector<ConceptRow> concept_rows;
  Tensor component_lm;  // NoConcepts only: language embeddings of task components
  std::vector<uint8_t> state_bits;

  int64_t inputs() const {
    return static_cast<int64_t>(concept_rows.size() + state_bits.size());
  }
};

TaacoModel::TaacoModel(ModelConfig config, StateSpace space, ConceptVocabulary vocab,
                       std::shared_ptr<const EmbeddingProvider> embedder)
    : config_(config), space_(std::move(space)), vocab_(std::move(vocab)),
      embedder_(std::move(embedder)) {
  config_.validate();
  space_.validate();
  if (!embedder_) raise(ErrorCode::InvalidArgument, "model requires an embedding provider");
  if (embedder_->dimension() != config_.lm_dim) {
    raise(ErrorCode::DimensionMismatch,
          "embedder dimension " + std::to_string(embedder_->dimension()) + " != lm_dim " +
              std::to_string(config_.lm_dim));
  }
  embedder_id_ = embedder_->id();

  int e = config_.embed_dim();
  int d = config_.encoder.model_dim;
  Rng rng(config_.encoder.seed);
  weights_.type_embed = Parameter("type_embed", xavier_uniform(kNumComponentTypes, e, rng));
  Tensor state_init = space_.size() == 0
                          ? Tensor(0, e)
                          : xavier_uniform(static_cast<int64_t>(space_.size()), e, rng);
  weights_.state_embed = Parameter("state_embed", std::move(state_init));
  weights_.rho_c_w = Parameter("rho_c.w", xavier_uniform(config_.lm_dim, e, rng));
  weights_.rho_c_b = Parameter("rho_c.b", Tensor(1, e));
  weights_.rho_m_w1 = Parameter("rho_m.w1", xavier_uniform(1, e, rng));
  weights_.rho_m_b1 = Parameter("rho_m.b1", Tensor(1, e));
  weights_.rho_m_w2 = Parameter("rho_m.w2", xavier_uniform(e, e, rng));
  weights_.rho_m_b2 = Parameter("rho_m.b2", Tensor(1, e));
  weights_.out_token = Parameter("out_token", xavier_uniform(1, d, rng));
  weights_.encoder = EncoderParams::init(config_.encoder, rng);
  weights_.head_w = Parameter("head.w", xavier_uniform(d, kNumLabels, rng));
  weights_.head_b = Parameter("head.b", Tensor(1, kNumLabels));

  // Fixed language embeddings for every vocabulary concept, in vocab order.
  auto concepts = vocab_.all();
  concept_lm_ = Tensor(static_cast<int64_t>(concepts.size()), config_.lm_dim);
  for (size_t i = 0; i < concepts.size(); ++i) {
    auto vec = embedder_->embed(concepts[i].text);
    if (static_cast<int>(vec.size()) != config_.lm_dim) {
      raise(ErrorCode::DimensionMismatch, "embedding of '" + concepts[i].text + "' has dim " +
                                              std::to_string(vec.size()));
    }
    for (int j = 0; j < config_.lm_dim; ++j) concept_lm_.at(static_cast<int64_t>(i), j) = vec[j];
  }
}

std::vector<Parameter*> TaacoModel::parameters() {
  std::vector<Parameter*> out;
  out.reserve(16 + 16 * weights_.encoder.layers.size());
  for (Parameter* p :
       {&weights_.type_embed, &weights_.state_embed, &weights_.rho_c_w, &weights_.rho_c_b,
        &weights_.rho_m_w1, &weights_.rho_m_b1, &weights_.rho_m_w2, &weights_.rho_m_b2,
        &weights_.out_token}) {
    out.push_back(p);
  }
  weights_.encoder.collect(out);
  out.push_back(&weights_.head_w);
  out.push_back(&weights_.head_b);
  return out;
}

std::vector<ExplanationItem> TaacoModel::explanation_space(const ScoredRepresentation& rep,
                                                           const TaskDescription& task) const {
  if (config_.variant == ModelConfig::Variant::Full) return token_refs(rep, space_);
  std::vector<ExplanationItem> refs;
  for (const auto& [type, component] : task.components()) {
    refs.push_back(ExplanationItem::for_component(component, type, ""));
  }
  for (const auto& name : space_.variables) refs.push_back(ExplanationItem::for_state(name));
  return refs;
}

TaacoModel::TokenPlan TaacoModel::plan_tokens(const ScoredRepresentation* rep,
                                              const TaskDescription* task,
                                              const StateVector& state) const {
  if (state.values.size() != space_.size()) {
    raise(ErrorCode::StateSpaceMismatch,
          "state has " + std::to_string(state.values.size()) + " variables, model expects " +
              std::to_string(space_.size()));
  }
  TokenPlan plan;
  if (config_.variant == ModelConfig::Variant::Full) {
    if (!rep) raise(ErrorCode::InvalidArgument, "missing representation");
    // Per-type offsets into the concatenated concept matrix.
    std::array<int, kNumConceptTypes> offset{};
    int running = 0;
    for (int t = 0; t < kNumConceptTypes; ++t) {
      offset[static_cast<size_t>(t)] = running;
      running += static_cast<int>(vocab_.of_type(static_cast<ComponentType>(t)).size());
    }
    const auto& entries = rep->entries;
    size_t idx = 0;
    while (idx < entries.size()) {
      ComponentType type = entries[idx].type;
      if (static_cast<int>(type) >= kNumConceptTypes) {
        raise(ErrorCode::VocabularyMismatch, "representation contains a state-typed entry");
      }
      const auto& concepts = vocab_.of_type(type);
      if (concepts.empty() || idx + concepts.size() > entries.size()) {
        raise(ErrorCode::VocabularyMismatch,
              "representation does not follow this model's vocabulary layout");
      }
      std::string component_key = match_key(entries[idx].component);
      for (size_t j = 0; j < concepts.size(); ++j) {
        const auto& entry = entries[idx + j];
        if (entry.type != type || match_key(entry.component) != component_key ||
            match_key(entry.concept_text) != match_key(concepts[j].text)) {
          raise(ErrorCode::VocabularyMismatch,
                "representation entry " + std::to_string(idx + j) +
                    " does not match the model vocabulary (expected concept '" + concepts[j].text +
                    "')");
        }
        if (entry.match < 0.0 || entry.match > 1.0) {
          raise(ErrorCode::InvalidArgument, "match score out of [0,1]");
        }
        plan.concept_rows.push_back(
            {static_cast<int>(type), offset[static_cast<size_t>(type)] + static_cast<int>(j),
             entry.match});
      }
      idx += concepts.size();
    }
  } else {
    if (!task) raise(ErrorCode::InvalidArgument, "NoConcepts tokenization needs the task");
    auto components = task->components();
    plan.component_lm = Tensor(static_cast<int64_t>(components.size()), config_.lm_dim);
    for (size_t i = 0; i < components.size(); ++i) {
      auto vec = embedder_->embed(components[i].second);
      for (int j = 0; j < config_.lm_dim; ++j) {
        plan.component_lm.at(static_cast<int64_t>(i), j) = vec[j];
      }
      plan.concept_rows.push_back(
          {static_cast<int>(components[i].first), static_cast<int>(i), 1.0});
    }
  }
  plan.state_bits.reserve(space_.size());
  for (size_t i = 0; i < space_.size(); ++i) {
    plan.state_bits.push_back(state.values[i] ? 1 : 0);
  }
  return plan;
}

// Assembles the [n+1, d] token matrix on the tape. Shared by training and the
// public assemble_tokens.
Graph::Var TaacoModel::assemble_graph(Graph& g, const TokenPlan& plan, Weights& w,
                                      const Tensor& concept_lm, ModelConfig::Variant variant) {
  Graph::Var type_table = g.leaf(w.type_embed);
  Graph::Var lm_source = g.constant(variant == ModelConfig::Variant::Full ? concept_lm
                                                                          : plan.component_lm);
  Graph::Var theta_all = g.add_row(g.matmul(lm_source, g.leaf(w.rho_c_w)), g.leaf(w.rho_c_b));

  // One pass of the magnitude projection over the distinct score values.
  std::map<double, int> m_index;
  for (const auto& row : plan.concept_rows) m_index.emplace(row.m, 0);
  for (uint8_t bit : plan.state_bits) m_index.emplace(bit ? 1.0 : 0.0, 0);
  Tensor m_values(static_cast<int64_t>(m_index.size()), 1);
  int next = 0;
  for (auto& [value, idx] : m_index) {
    idx = next;
    m_values[next] = value;
    ++next;
  }
  Graph::Var m1 = g.relu(g.add_row(g.matmul(g.constant(m_values), g.leaf(w.rho_m_w1)),
                                   g.leaf(w.rho_m_b1)));
  Graph::Var m_all = g.add_row(g.matmul(m1, g.leaf(w.rho_m_w2)), g.leaf(w.rho_m_b2));

  Graph::Var state_table = g.leaf(w.state_embed);

  std::vector<Graph::Var> rows;
  rows.reserve(static_cast<size_t>(plan.inputs()) + 1);
  for (const auto& row : plan.concept_rows) {
    rows.push_back(g.concat_cols({g.pick_row(type_table, row.type_slot),
                                  g.pick_row(theta_all, row.lm_row),
                                  g.pick_row(m_all, m_index.at(row.m))}));
  }
  constexpr int kStateSlot = static_cast<int>(ComponentType::State);
  for (size_t i = 0; i < plan.state_bits.size(); ++i) {
    rows.push_back(g.concat_cols({g.pick_row(type_table, kStateSlot),
                                  g.pick_row(state_table, static_cast<int64_t>(i)),
                                  g.pick_row(m_all, m_index.at(plan.state_bits[i] ? 1.0 : 0.0))}));
  }
  rows.push_back(g.leaf(w.out_token));
  return g.stack_rows(rows);
}

TaacoModel::GraphOut TaacoModel::build_graph(Graph& g, const TokenPlan& plan) {
  Graph::Var x = assemble_graph(g, plan, weights_, concept_lm_, config_.variant);
  auto enc = encoder_forward_graph(g, x, weights_.encoder);
  int64_t out_row = plan.inputs();
  Graph::Var out_feature = g.pick_row(enc.features, out_row);
  Graph::Var logits =
      g.add_row(g.matmul(out_feature, g.leaf(weights_.head_w)), g.leaf(weights_.head_b));

  std::vector<Graph::Var> head_rows;
  head_rows.reserve(enc.final_attention.size());
  for (Graph::Var attn : enc.final_attention) head_rows.push_back(g.pick_row(attn, out_row));
  Graph::Var mean_row = g.average(head_rows);
  Graph::Var input_attention = g.slice_cols(mean_row, 0, out_row);
  return {logits, input_attention, out_row};
}

TokenizedInput TaacoModel::assemble_tokens(const ScoredRepresentation& rep,
                                           const StateVector& state, const TaskDescription* task) {
  TokenPlan plan = plan_tokens(&rep, task, state);
  Graph g;
  Graph::Var x = assemble_graph(g, plan, weights_, concept_lm_, config_.variant);
  TokenizedInput out;
  out.tokens = g.value(x);
  if (config_.variant == ModelConfig::Variant::Full) {
    out.index_map = token_refs(rep, space_);
  } else {
    out.index_map = explanation_space(rep, *task);
  }
  return out;
}

ForwardResult TaacoModel::forward(const TokenizedInput& tokens) {
  if (tokens.tokens.rank() != 2 || tokens.tokens.cols() != config_.encoder.model_dim) {
    raise(ErrorCode::ShapeMismatch, "token matrix must be [n+1, model_dim]");
  }
  int64_t out_row = tokens.tokens.rows() - 1;
  Graph g;
  auto enc = encoder_forward_graph(g, g.constant(tokens.tokens), weights_.encoder);
  Graph::Var out_feature = g.pick_row(enc.features, out_row);
  Graph::Var logits =
      g.add_row(g.matmul(out_feature, g.leaf(weights_.head_w)), g.leaf(weights_.head_b));
  std::vector<Graph::Var> head_rows;
  for (Graph::Var attn : enc.final_attention) head_rows.push_back(g.pick_row(attn, out_row));
  Graph::Var mean_row = g.average(head_rows);

  ForwardResult result;
  result.logits = g.value(logits);
  const Tensor& row = g.value(mean_row);
  result.attention.assign(row.data(), row.data() + out_row);
  result.out_self_attention = row[out_row];
  return result;
}

Graph::Var TaacoModel::point_loss(Graph& g, const TokenPlan& plan, const TrainingPoint& point,
                                  double lambda) {
  GraphOut out = build_graph(g, plan);
  Graph::Var loss = g.cross_entropy_logits(out.logits, static_cast<int>(point.label));
  if (point.explanation_targets) {
    if (static_cast<int64_t>(point.explanation_targets->size()) != plan.inputs()) {
      raise(ErrorCode::ShapeMismatch,
            "explanation targets cover " + std::to_string(point.explanation_targets->size()) +
                " tokens, input has " + std::to_string(plan.inputs()));
    }
    Graph::Var bce = g.bce_explanation(out.input_attention, *point.explanation_targets);
    loss = g.add(loss, g.scale(bce, lambda));
  }
  return loss;
}

double TaacoModel::compute_loss(std::span<const TrainingPoint> points, double lambda) {
  if (points.empty()) raise(ErrorCode::InvalidArgument, "loss over zero points");
  double total = 0.0;
  Graph g;
  for (const auto& point : points) {
    g.clear();
    TokenPlan plan = plan_tokens(point.rep.get(), point.task.get(), point.state);
    total += g.value(point_loss(g, plan, point, lambda))[0];
  }
  return total / static_cast<double>(points.size());
}

double TaacoModel::loss_and_gradients(std::span<const TrainingPoint> points, double lambda) {
  if (points.empty()) raise(ErrorCode::InvalidArgument, "loss over zero points");
  double total = 0.0;
  double inv = 1.0 / static_cast<double>(points.size());
  Graph g;
  for (const auto& point : points) {
    g.clear();
    TokenPlan plan = plan_tokens(point.rep.get(), point.task.get(), point.state);
    Graph::Var loss = point_loss(g, plan, point, lambda);
    total += g.value(loss)[0];
    g.backward(loss, inv);
  }
  return total * inv;
}

TrainResult TaacoModel::train(std::span<const TrainingPoint> points, const TrainConfig& config) {
  if (points.empty()) raise(ErrorCode::InvalidArgument, "cannot train on zero points");
  if (config.epochs <= 0) raise(ErrorCode::InvalidArgument, "epochs must be positive");

  std::vector<TokenPlan> plans;
  plans.reserve(points.size());
  for (const auto& point : points) {
    plans.push_back(plan_tokens(point.rep.get(), point.task.get(), point.state));
  }

  auto params = parameters();
  AdamState adam(params, AdamConfig{.lr = config.lr});
  TrainResult result;
  result.loss_history.reserve(static_cast<size_t>(config.epochs));
  double inv = 1.0 / static_cast<double>(points.size());
  Graph g;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (size_t i = 0; i < points.size(); ++i) {
      g.clear();
      Graph::Var loss = point_loss(g, plans[i], points[i], config.lambda);
      total += g.value(loss)[0];
      g.backward(loss, inv);
    }
    double mean = total * inv;
    if (!std::isfinite(mean)) {
      raise(ErrorCode::NonFiniteLoss,
            "epoch " + std::to_string(epoch) + ": loss " + std::to_string(mean) + " (lr=" +
                std::to_string(config.lr) + ", lambda=" + std::to_string(config.lambda) + ")");
    }
    adam.step(params);
    result.loss_history.push_back(mean);
    if (config.log_every > 0 && epoch % config.log_every == 0) {
      std::cerr << "[taaco] epoch " << epoch << " loss " << mean << "\n";
    }
  }
  return result;
}

Prediction TaacoModel::predict(const TaskDescription& task, const StateVector& state,
                               CompletionClient& client, ScoreCache& cache, ScoreMode mode) {
  TaskDescription validated = validate_task(task);
  ScoredRepresentation rep;
  if (config_.variant == ModelConfig::Variant::Full) {
    rep = build_representation(validated, vocab_, client, cache, mode);
  }
  return predict_from_rep(rep, state, &validated);
}

Prediction TaacoModel::predict_from_rep(const ScoredRepresentation& rep, const StateVector& state,
                                        const TaskDescription* task) {
  TokenPlan plan = plan_tokens(&rep, task, state);
  Graph g;
  GraphOut out = build_graph(g, plan);

  Prediction pred;
  auto probs = softmax(g.value(out.logits));
  for (int i = 0; i < kNumLabels; ++i) pred.probabilities[static_cast<size_t>(i)] = probs[i];
  int best = 0;
  for (int i = 1; i < kNumLabels; ++i) {
    if (probs[i] > probs[best]) best = i;  // ties keep the first label in enum order
  }
  pred.label = static_cast<AdaptationLabel>(best);

  const Tensor& attn = g.value(out.input_attention);
  pred.attention.assign(attn.data(), attn.data() + attn.size());
  if (!pred.attention.empty()) {
    std::vector<ExplanationItem> refs;
    if (config_.variant == ModelConfig::Variant::Full) {
      refs = token_refs(rep, space_);
    } else {
      refs = explanation_space(rep, *task);
    }
    size_t arg = 0;
    for (size_t i = 1; i < pred.attention.size(); ++i) {
      if (pred.attention[i] > pred.attention[arg]) arg = i;
    }
    pred.explanation = refs[arg];
  }
  return pred;
}

}  // namespace taaco
