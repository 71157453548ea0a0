#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "taaco/baselines.hpp"
#include "taaco/dataio.hpp"
#include "taaco/model.hpp"
#include "taaco/report.hpp"

namespace taaco {

// Exactly one category per misprediction; none when pred == truth.
std::optional<ErrorCategory> classify_error(AdaptationLabel pred, AdaptationLabel truth);

struct PredictionRecord {
  std::string task_id;
  AdaptationLabel predicted = AdaptationLabel::DoNow;
  AdaptationLabel truth = AdaptationLabel::DoNow;
  std::optional<ExplanationItem> predicted_explanation;
  // Ground-truth explanation set: components named by the user plus
  // constrained state variables. Absent when the sample provides neither.
  std::optional<std::vector<ExplanationItem>> truth_explanations;
};

double prediction_accuracy(std::span<const PredictionRecord> records);

struct ExplanationAccuracy {
  std::optional<double> value;  // absent when eligible == 0
  int eligible = 0;
  int hits = 0;
};

// Eligible records have ground-truth explanations and a correct prediction;
// a hit means the top explanation is part of the ground-truth set.
ExplanationAccuracy explanation_accuracy(std::span<const PredictionRecord> records);

// Seeded shuffle into k folds of near-equal size (diff <= 1) that partition
// 0..count-1. Throws TooFewSamples when count < k.
std::vector<std::vector<int>> kfold_split(int count, int k, uint64_t seed);

enum class Condition { Taaco, Oracle, Rules, Llm, NoConcepts, NoConceptTraining };

const char* condition_name(Condition condition);
Condition parse_condition(const std::string& text);

struct EvalConfig {
  std::vector<int> sizes{10, 20, 30, 40};
  int k = 5;
  uint64_t seed = 0;
  ModelConfig model;        // encoder dims; per-run seeds are derived from `seed`
  TrainConfig train;        // epochs, lr, lambda
  int n_aug = 4;            // training state realizations per feedback sample
  int eval_aug = 2;         // held-out state realizations per feedback sample
  int threads = 0;          // fold-level parallelism; 0 = hardware concurrency
  CompletionClient* fewshot_client = nullptr;  // required for Condition::Llm
};

// k-fold feedback-size sweep for one condition: per fold and size, train (or
// induce) on a seeded subset of the training tasks and evaluate on the held
// -out fold's feedback expanded to concrete states. Rows cover every
// (size, fold) plus pooled aggregates per size.
EvaluationReport run_feedback_curve(const PersonaDataset& persona, const ScoreCache& cache,
                                    const std::string& scorer_id,
                                    std::shared_ptr<const EmbeddingProvider> embedder,
                                    Condition condition, const EvalConfig& config);

// The two model ablations, same protocol. `which` is "no_concepts" or
// "no_concept_training".
EvaluationReport run_ablation(const PersonaDataset& persona, const ScoreCache& cache,
                              const std::string& scorer_id,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const std::string& which, const EvalConfig& config);

}  // namespace taaco
