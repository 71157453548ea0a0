#include "taaco/evaluation.hpp"

#include <algorithm>
#include <thread>

#include "taaco/text.hpp"

namespace taaco {

std::optional<ErrorCategory> classify_error(AdaptationLabel pred, AdaptationLabel truth) {
  if (pred == truth) return std::nullopt;
  bool pred_acts = pred == AdaptationLabel::DoNow || pred == AdaptationLabel::DoLater;
  bool truth_forbids = truth == AdaptationLabel::NoAction || truth == AdaptationLabel::Remind;
  if (pred_acts && truth_forbids) return ErrorCategory::PerformedProhibited;
  if (pred == AdaptationLabel::NoAction) return ErrorCategory::SkippedTask;
  if (pred_acts) return ErrorCategory::UnnecessaryDelayOrDisturbance;  // do_now <-> do_later
  return ErrorCategory::UnnecessaryInteraction;                        // wrongly predicted remind
}

double prediction_accuracy(std::span<const PredictionRecord> records) {
  if (records.empty()) raise(ErrorCode::EmptyRecords, "no prediction records");
  int correct = 0;
  for (const auto& r : records) {
    if (r.predicted == r.truth) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

ExplanationAccuracy explanation_accuracy(std::span<const PredictionRecord> records) {
  ExplanationAccuracy out;
  for (const auto& r : records) {
    if (!r.truth_explanations || r.truth_explanations->empty()) continue;
    if (r.predicted != r.truth) continue;
    ++out.eligible;
    if (r.predicted_explanation) {
      for (const auto& gt : *r.truth_explanations) {
        if (r.predicted_explanation->matches(gt)) {
          ++out.hits;
          break;
        }
      }
    }
  }
  if (out.eligible > 0) {
    out.value = static_cast<double>(out.hits) / static_cast<double>(out.eligible);
  }
  return out;
}

std::vector<std::vector<int>> kfold_split(int count, int k, uint64_t seed) {
  if (k <= 0) raise(ErrorCode::InvalidArgument, "k must be positive");
  if (count < k) {
    raise(ErrorCode::TooFewSamples,
          std::to_string(count) + " samples cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<int> order(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) order[static_cast<size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::vector<int>> folds(static_cast<size_t>(k));
  int base = count / k;
  int extra = count % k;
  size_t cursor = 0;
  for (int f = 0; f < k; ++f) {
    int take = base + (f < extra ? 1 : 0);
    for (int i = 0; i < take; ++i) folds[static_cast<size_t>(f)].push_back(order[cursor++]);
  }
  return folds;
}

const char* condition_name(Condition condition) {
  switch (condition) {
    case Condition::Taaco: return "taaco";
    case Condition::Oracle: return "oracle";
    case Condition::Rules: return "rules";
    case Condition::Llm: return "llm";
    case Condition::NoConcepts: return "no_concepts";
    case Condition::NoConceptTraining: return "no_concept_training";
  }
  return "?";
}

Condition parse_condition(const std::string& text) {
  std::string key = match_key(text);
  if (key == "taaco") return Condition::Taaco;
  if (key == "oracle") return Condition::Oracle;
  if (key == "rules") return Condition::Rules;
  if (key == "llm") return Condition::Llm;
  if (key == "no_concepts") return Condition::NoConcepts;
  if (key == "no_concept_training") return Condition::NoConceptTraining;
  raise(ErrorCode::InvalidArgument, "unknown condition '" + text + "'");
}

namespace {

constexpr uint64_t kTagFolds = 0xF01D;
constexpr uint64_t kTagSubset = 0x5B5E;
constexpr uint64_t kTagAug = 0xA9A9;
constexpr uint64_t kTagEval = 0xE7A1;
constexpr uint64_t kTagInit = 0x1217;

std::vector<StateVector> realize_states(const FeedbackSample& sample, const StateSpace& space,
                                        int count, Rng& rng) {
  std::vector<std::optional<bool>> fixed(space.size());
  if (sample.constraint) {
    for (const auto& [name, value] : sample.constraint->bindings) {
      auto idx = space.index_of(name);
      if (!idx) raise(ErrorCode::UnknownVariable, "constraint variable '" + name + "'");
      fixed[*idx] = value;
    }
  }
  std::vector<StateVector> out(static_cast<size_t>(count));
  for (auto& state : out) {
    state.values.resize(space.size());
    for (size_t i = 0; i < space.size(); ++i) {
      state.values[i] = fixed[i] ? *fixed[i] : rng.coin();
    }
  }
  return out;
}

std::optional<std::vector<ExplanationItem>> ground_truth_set(const FeedbackSample& sample) {
  if (!sample.has_explanation() && !sample.has_constraint()) return std::nullopt;
  std::vector<ExplanationItem> items;
  if (sample.explanation) items = *sample.explanation;
  if (sample.constraint) {
    for (const auto& [name, value] : sample.constraint->bindings) {
      (void)value;
      items.push_back(ExplanationItem::for_state(name));
    }
  }
  return items;
}

// Maps a freeform "component: concept" answer onto the task, if possible.
std::optional<ExplanationItem> llm_explanation_item(const std::string& text,
                                                    const TaskDescription& task) {
  auto colon = text.find(':');
  if (colon == std::string::npos) return std::nullopt;
  std::string component = match_key(text.substr(0, colon));
  std::string concept_text = display_normalize(text.substr(colon + 1));
  for (const auto& [type, comp] : task.components()) {
    if (match_key(comp) == component) {
      return ExplanationItem::for_component(comp, type, concept_text);
    }
  }
  return std::nullopt;
}

MetricRow make_row(const std::string& condition, int size, int fold,
                   std::span<const PredictionRecord> records) {
  MetricRow row;
  row.condition = condition;
  row.size = size;
  row.fold = fold;
  row.points = static_cast<int>(records.size());
  for (const auto& r : records) {
    if (r.predicted == r.truth) {
      ++row.correct;
    } else if (auto category = classify_error(r.predicted, r.truth)) {
      ++row.error_counts[static_cast<size_t>(*category)];
    }
  }
  row.accuracy = row.points > 0
                     ? static_cast<double>(row.correct) / static_cast<double>(row.points)
                     : 0.0;
  for (int c = 0; c < kNumErrorCategories; ++c) {
    row.error_rates[static_cast<size_t>(c)] =
        row.points > 0 ? static_cast<double>(row.error_counts[static_cast<size_t>(c)]) /
                             static_cast<double>(row.points)
                       : 0.0;
  }
  auto expl = explanation_accuracy(records);
  row.explanation_eligible = expl.eligible;
  row.explanation_hits = expl.hits;
  row.explanation_accuracy = expl.value;
  return row;
}

struct FoldOutput {
  // indexed by size position
  std::vector<MetricRow> rows;
  std::vector<std::vector<PredictionRecord>> records;
};

}  // namespace

EvaluationReport run_feedback_curve(const PersonaDataset& persona, const ScoreCache& cache,
                                    const std::string& scorer_id,
                                    std::shared_ptr<const EmbeddingProvider> embedder,
                                    Condition condition, const EvalConfig& config) {
  persona.validate();
  const StateSpace& space = persona.state_space;
  int task_count = static_cast<int>(persona.tasks.size());
  bool is_model = condition == Condition::Taaco || condition == Condition::Oracle ||
                  condition == Condition::NoConcepts || condition == Condition::NoConceptTraining;
  if (is_model && !embedder) raise(ErrorCode::InvalidArgument, "model conditions need an embedder");
  if (condition == Condition::Llm && !config.fewshot_client) {
    raise(ErrorCode::InvalidArgument, "llm condition needs a completion client");
  }

  std::vector<std::shared_ptr<const TaskDescription>> tasks;
  tasks.reserve(persona.tasks.size());
  for (const auto& pt : persona.tasks) {
    tasks.push_back(std::make_shared<TaskDescription>(pt.task));
  }

  // Representations are prepared once per persona against the warm cache;
  // replay mode guarantees zero client calls.
  std::vector<std::shared_ptr<const ScoredRepresentation>> base_reps(tasks.size());
  std::vector<std::vector<std::shared_ptr<const ScoredRepresentation>>> oracle_reps(tasks.size());
  auto empty_rep = std::make_shared<const ScoredRepresentation>();
  if (is_model && condition != Condition::NoConcepts) {
    ReplayClient replay(scorer_id);
    ScoreCache working = cache.detached_copy();
    for (size_t ti = 0; ti < tasks.size(); ++ti) {
      base_reps[ti] = std::make_shared<const ScoredRepresentation>(
          build_representation(*tasks[ti], persona.vocabulary, replay, working));
      if (condition == Condition::Oracle) {
        for (const auto& sample : persona.tasks[ti].feedback) {
          oracle_reps[ti].push_back(
              sample.has_explanation()
                  ? std::make_shared<const ScoredRepresentation>(apply_oracle(
                        *base_reps[ti], *sample.explanation, persona.vocabulary))
                  : base_reps[ti]);
        }
      }
    }
  }

  // Held-out states are fixed per (task, sample) so every condition and size
  // sees the same evaluation points.
  std::vector<std::vector<std::vector<StateVector>>> eval_states(tasks.size());
  for (size_t ti = 0; ti < tasks.size(); ++ti) {
    const auto& feedback = persona.tasks[ti].feedback;
    eval_states[ti].resize(feedback.size());
    for (size_t si = 0; si < feedback.size(); ++si) {
      Rng rng(mix_seed({config.seed, kTagEval, static_cast<uint64_t>(ti), static_cast<uint64_t>(si)}));
      eval_states[ti][si] = realize_states(feedback[si], space, config.eval_aug, rng);
    }
  }

  auto folds = kfold_split(task_count, config.k, mix_seed({config.seed, kTagFolds}));

  auto pick_train_rep = [&](size_t ti, size_t si) -> std::shared_ptr<const ScoredRepresentation> {
    if (condition == Condition::NoConcepts) return empty_rep;
    if (condition == Condition::Oracle) return oracle_reps[ti][si];
    return base_reps[ti];
  };

  auto run_fold = [&](int f) {
    FoldOutput out;
    std::vector<int> pool;
    for (int ti = 0; ti < task_count; ++ti) {
      if (std::find(folds[static_cast<size_t>(f)].begin(), folds[static_cast<size_t>(f)].end(),
                    ti) == folds[static_cast<size_t>(f)].end()) {
        pool.push_back(ti);
      }
    }

    for (int size : config.sizes) {
      std::vector<int> chosen = pool;
      Rng subset_rng(mix_seed({config.seed, kTagSubset, static_cast<uint64_t>(f),
                               static_cast<uint64_t>(size)}));
      subset_rng.shuffle(chosen);
      if (static_cast<int>(chosen.size()) > size) chosen.resize(static_cast<size_t>(size));

      std::vector<FeedbackSample> train_samples;
      for (int ti : chosen) {
        const auto& feedback = persona.tasks[static_cast<size_t>(ti)].feedback;
        train_samples.insert(train_samples.end(), feedback.begin(), feedback.end());
      }

      RuleSet rules;
      std::unique_ptr<TaacoModel> model;
      if (condition == Condition::Rules) {
        rules = induce_rules(train_samples);
      } else if (is_model) {
        ModelConfig model_config = config.model;
        model_config.variant = condition == Condition::NoConcepts
                                   ? ModelConfig::Variant::NoConcepts
                                   : ModelConfig::Variant::Full;
        model_config.encoder.seed =
            mix_seed({config.seed, kTagInit, static_cast<uint64_t>(f),
                      static_cast<uint64_t>(size), static_cast<uint64_t>(condition)});
        model = std::make_unique<TaacoModel>(model_config, space, persona.vocabulary, embedder);

        std::vector<TrainingPoint> points;
        Rng aug_rng(mix_seed({config.seed, kTagAug, static_cast<uint64_t>(f),
                              static_cast<uint64_t>(size)}));
        for (int ti : chosen) {
          const auto& feedback = persona.tasks[static_cast<size_t>(ti)].feedback;
          for (size_t si = 0; si < feedback.size(); ++si) {
            auto rep = pick_train_rep(static_cast<size_t>(ti), si);
            std::vector<ExplanationItem> space_override;
            const std::vector<ExplanationItem>* override_ptr = nullptr;
            if (condition == Condition::NoConcepts) {
              space_override =
                  model->explanation_space(*rep, *tasks[static_cast<size_t>(ti)]);
              override_ptr = &space_override;
            }
            auto expanded =
                expand_feedback(feedback[si], space, tasks[static_cast<size_t>(ti)], rep,
                                config.n_aug, aug_rng, override_ptr);
            points.insert(points.end(), std::make_move_iterator(expanded.begin()),
                          std::make_move_iterator(expanded.end()));
          }
        }
        TrainConfig train_config = config.train;
        if (condition == Condition::NoConceptTraining) train_config.lambda = 0.0;
        model->train(points, train_config);
      }

      std::vector<PredictionRecord> records;
      for (int ti : folds[static_cast<size_t>(f)]) {
        const auto& persona_task = persona.tasks[static_cast<size_t>(ti)];
        for (size_t si = 0; si < persona_task.feedback.size(); ++si) {
          const FeedbackSample& sample = persona_task.feedback[si];
          auto truth_set = ground_truth_set(sample);
          for (const StateVector& state : eval_states[static_cast<size_t>(ti)][si]) {
            PredictionRecord rec;
            rec.task_id = persona_task.task.id;
            rec.truth = sample.adaptation;
            rec.truth_explanations = truth_set;
            if (condition == Condition::Rules) {
              auto rp = rule_predict(rules, persona_task.task, space, state);
              rec.predicted = rp.label;
              if (rp.used) {
                rec.predicted_explanation = ExplanationItem::for_component(
                    rp.used->component_text, rp.used->component_type, "");
              }
            } else if (condition == Condition::Llm) {
              std::string prompt =
                  build_fewshot_prompt(train_samples, space, persona_task.task, state);
              try {
                auto parsed = parse_llm_response(config.fewshot_client->complete(prompt));
                rec.predicted = parsed.label;
                if (parsed.explanation) {
                  rec.predicted_explanation =
                      llm_explanation_item(*parsed.explanation, persona_task.task);
                }
              } catch (const Error& e) {
                if (e.code() != ErrorCode::Unparseable) throw;
                // Unparseable responses count as incorrect, deterministically.
                rec.predicted = sample.adaptation == AdaptationLabel::NoAction
                                    ? AdaptationLabel::Remind
                                    : AdaptationLabel::NoAction;
              }
            } else {
              auto rep = pick_train_rep(static_cast<size_t>(ti), si);
              auto pred = model->predict_from_rep(*rep, state, tasks[static_cast<size_t>(ti)].get());
              rec.predicted = pred.label;
              rec.predicted_explanation = pred.explanation;
            }
            records.push_back(std::move(rec));
          }
        }
      }
      out.rows.push_back(make_row(condition_name(condition), size, f, records));
      out.records.push_back(std::move(records));
    }
    return out;
  };

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (condition == Condition::Llm) threads = 1;  // completion clients may be stateful

  std::vector<FoldOutput> outputs(static_cast<size_t>(config.k));
  std::vector<std::exception_ptr> failures(static_cast<size_t>(config.k));
  for (int start = 0; start < config.k; start += threads) {
    int batch = std::min(threads, config.k - start);
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(batch));
    for (int i = 0; i < batch; ++i) {
      int f = start + i;
      workers.emplace_back([&, f]() {
        try {
          outputs[static_cast<size_t>(f)] = run_fold(f);
        } catch (...) {
          failures[static_cast<size_t>(f)] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  EvaluationReport report;
  report.persona_id = persona.persona_id;
  report.seed = config.seed;
  report.k = config.k;
  report.sizes = config.sizes;
  for (size_t s = 0; s < config.sizes.size(); ++s) {
    for (int f = 0; f < config.k; ++f) {
      report.rows.push_back(outputs[static_cast<size_t>(f)].rows[s]);
    }
  }
  for (size_t s = 0; s < config.sizes.size(); ++s) {
    std::vector<PredictionRecord> pooled;
    for (int f = 0; f < config.k; ++f) {
      const auto& r = outputs[static_cast<size_t>(f)].records[s];
      pooled.insert(pooled.end(), r.begin(), r.end());
    }
    report.rows.push_back(make_row(condition_name(condition), config.sizes[s], -1, pooled));
  }
  report.check_invariants();
  return report;
}

EvaluationReport run_ablation(const PersonaDataset& persona, const ScoreCache& cache,
                              const std::string& scorer_id,
                              std::shared_ptr<const EmbeddingProvider> embedder,
                              const std::string& which, const EvalConfig& config) {
  Condition condition = parse_condition(which);
  if (condition != Condition::NoConcepts && condition != Condition::NoConceptTraining) {
    raise(ErrorCode::InvalidArgument, "'" + which + "' is not an ablation");
  }
  return run_feedback_curve(persona, cache, scorer_id, std::move(embedder), condition, config);
}

}  // namespace taaco
