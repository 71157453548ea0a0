#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "taaco/checkpoint.hpp"
#include "taaco/dataio.hpp"
#include "taaco/evaluation.hpp"
#include "taaco/synthetic.hpp"
#include "taaco/text.hpp"

namespace {

using namespace taaco;

std::shared_ptr<const EmbeddingProvider> make_embedder(const std::string& table_path,
                                                       uint64_t embed_seed, int lm_dim) {
  if (!table_path.empty()) {
    return std::make_shared<TableEmbedder>(TableEmbedder::load(table_path));
  }
  return std::make_shared<HashEmbedder>(embed_seed, lm_dim);
}

bool parse_bool_word(const std::string& word, bool& out) {
  std::string key = match_key(word);
  if (key == "true" || key == "1" || key == "yes" || key == "y") {
    out = true;
    return true;
  }
  if (key == "false" || key == "0" || key == "no" || key == "n") {
    out = false;
    return true;
  }
  return false;
}

// "a=true,b=false" -> bindings. Throws on malformed input.
StateConstraint parse_bindings(const std::string& text) {
  StateConstraint constraint;
  if (display_normalize(text).empty()) return constraint;
  for (const std::string& part : split(text, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      raise(ErrorCode::ParseError, "expected name=true|false in '" + part + "'");
    }
    std::string name = display_normalize(part.substr(0, eq));
    bool value = false;
    if (name.empty() || !parse_bool_word(part.substr(eq + 1), value)) {
      raise(ErrorCode::ParseError, "expected name=true|false in '" + part + "'");
    }
    constraint.bindings[name] = value;
  }
  return constraint;
}

StateVector state_from_bindings(const StateSpace& space, const StateConstraint& bindings) {
  StateVector state;
  state.values.assign(space.size(), false);
  for (const auto& [name, value] : bindings.bindings) {
    auto idx = space.index_of(name);
    if (!idx) raise(ErrorCode::UnknownVariable, "state variable '" + name + "'");
    state.values[*idx] = value;
  }
  return state;
}

std::vector<std::string> csv_list(const std::string& text) {
  std::vector<std::string> out;
  for (const std::string& part : split(text, ',')) {
    std::string trimmed = display_normalize(part);
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

struct CommonModelFlags {
  int model_dim = 96;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 384;
  int lm_dim = kDefaultEmbeddingDim;
  uint64_t embed_seed = 13;
  std::string embeddings;

  void attach(CLI::App* cmd) {
    cmd->add_option("--model-dim", model_dim, "Transformer width (3*e)");
    cmd->add_option("--layers", layers, "Encoder layers");
    cmd->add_option("--heads", heads, "Attention heads");
    cmd->add_option("--ffn-dim", ffn_dim, "Feed-forward width");
    cmd->add_option("--lm-dim", lm_dim, "Language embedding dimension");
    cmd->add_option("--embed-seed", embed_seed, "Seed of the hash embedding provider");
    cmd->add_option("--embeddings", embeddings, "Precomputed embedding table file");
  }

  ModelConfig to_config(uint64_t seed) const {
    ModelConfig config;
    config.encoder.model_dim = model_dim;
    config.encoder.layers = layers;
    config.encoder.heads = heads;
    config.encoder.ffn_dim = ffn_dim;
    config.encoder.seed = seed;
    config.lm_dim = lm_dim;
    return config;
  }
};

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

struct ScoreArgs {
  std::string persona, cache, mode = "replay", scorer_id, endpoint, model;
  double timeout = 30.0;
  int concurrency = 4;
};

int run_score(const ScoreArgs& args) {
  PersonaDataset persona = load_persona(args.persona);
  ScoreCache cache = ScoreCache::open(args.cache);
  std::vector<TaskDescription> tasks;
  for (const auto& pt : persona.tasks) tasks.push_back(pt.task);

  if (args.mode == "live") {
    LiveClientConfig config;
    config.endpoint = args.endpoint;
    config.model = args.model;
    config.timeout_seconds = args.timeout;
    config.max_concurrent = args.concurrency;
    LiveClient client(config);
    int calls = warm_cache(tasks, persona.vocabulary, client, cache, args.concurrency);
    std::cout << "scored " << calls << " pairs via " << args.endpoint << "; cache now holds "
              << cache.size() << " entries\n";
    return 0;
  }

  // Replay mode verifies coverage without any transport.
  std::string scorer = args.scorer_id.empty() ? args.model : args.scorer_id;
  if (scorer.empty()) raise(ErrorCode::InvalidArgument, "replay mode needs --scorer-id");
  size_t total = 0, missing = 0;
  for (const auto& task : tasks) {
    for (const auto& [type, component] : task.components()) {
      for (const Concept& concept_def : persona.vocabulary.of_type(type)) {
        ++total;
        if (!cache.lookup(scorer, type, component, concept_def.text)) ++missing;
      }
    }
  }
  std::cout << "cache covers " << (total - missing) << "/" << total << " pairs for scorer '"
            << scorer << "'\n";
  if (missing > 0) {
    std::cerr << "error: " << missing << " pairs missing; run score --mode live first\n";
    return 1;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string persona, cache, checkpoint, scorer_id;
  uint64_t seed = 0;
  int epochs = 1700;
  double lr = 1e-4;
  double lambda = 20.0;
  int n_aug = 4;
  int log_every = 0;
  CommonModelFlags model;
};

int run_train(const TrainArgs& args) {
  PersonaDataset persona = load_persona(args.persona);
  ScoreCache cache = ScoreCache::open(args.cache);
  auto embedder = make_embedder(args.model.embeddings, args.model.embed_seed, args.model.lm_dim);

  ReplayClient replay(args.scorer_id);
  TaacoModel model(args.model.to_config(args.seed), persona.state_space, persona.vocabulary,
                   embedder);

  std::vector<TrainingPoint> points;
  Rng aug_rng(mix_seed({args.seed, 0xA9A9}));
  for (const auto& pt : persona.tasks) {
    auto task = std::make_shared<const TaskDescription>(pt.task);
    auto rep = std::make_shared<const ScoredRepresentation>(
        build_representation(*task, persona.vocabulary, replay, cache));
    for (const auto& sample : pt.feedback) {
      auto expanded = expand_feedback(sample, persona.state_space, task, rep, args.n_aug, aug_rng);
      points.insert(points.end(), std::make_move_iterator(expanded.begin()),
                    std::make_move_iterator(expanded.end()));
    }
  }

  TrainConfig config;
  config.epochs = args.epochs;
  config.lr = args.lr;
  config.lambda = args.lambda;
  config.log_every = args.log_every;
  TrainResult result = model.train(points, config);
  save_checkpoint(model, args.checkpoint);
  std::cout << "trained on " << points.size() << " points for " << args.epochs
            << " epochs; final loss " << result.loss_history.back() << "\ncheckpoint written to "
            << args.checkpoint << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// predict
// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string checkpoint, cache, scorer_id, persona, task_file, task_id;
  std::string action, activity, objects, locations, state;
  std::string embeddings;
};

int run_predict(const PredictArgs& args) {
  std::optional<std::string> table;
  if (!args.embeddings.empty()) table = args.embeddings;
  TaacoModel model = load_checkpoint(args.checkpoint, nullptr, table);

  TaskDescription task;
  if (!args.persona.empty()) {
    PersonaDataset persona = load_persona(args.persona);
    if (!(model.vocabulary() == persona.vocabulary)) {
      raise(ErrorCode::VocabularyMismatch,
            "checkpoint vocabulary does not match persona '" + persona.persona_id + "'");
    }
    if (model.state_space().variables != persona.state_space.variables) {
      raise(ErrorCode::StateSpaceMismatch,
            "checkpoint state space does not match persona '" + persona.persona_id + "'");
    }
    if (!args.task_id.empty()) {
      for (const auto& pt : persona.tasks) {
        if (pt.task.id == args.task_id) task = pt.task;
      }
      if (task.id.empty()) raise(ErrorCode::InvalidArgument, "no task '" + args.task_id + "'");
    }
  }
  if (!args.task_file.empty()) {
    std::ifstream in(args.task_file);
    if (!in.is_open()) raise(ErrorCode::IoError, "cannot open " + args.task_file);
    nlohmann::json j = nlohmann::json::parse(in);
    task.id = j.value("id", "query");
    task.action = j.at("action").get<std::string>();
    task.activity = j.at("activity").get<std::string>();
    task.objects = j.value("objects", std::vector<std::string>{});
    task.locations = j.value("locations", std::vector<std::string>{});
  } else if (!args.action.empty()) {
    task.id = "query";
    task.action = args.action;
    task.activity = args.activity;
    task.objects = csv_list(args.objects);
    task.locations = csv_list(args.locations);
  }
  if (task.action.empty()) {
    raise(ErrorCode::InvalidArgument, "give a task via --task-file, --task-id or --action/...");
  }

  StateVector state = state_from_bindings(model.state_space(), parse_bindings(args.state));
  ScoreCache cache = ScoreCache::open(args.cache);
  ReplayClient replay(args.scorer_id);
  Prediction pred = model.predict(task, state, replay, cache);

  std::cout << "adaptation: " << adaptation_label_name(pred.label) << "\n";
  std::cout << "probabilities:";
  for (int l = 0; l < kNumLabels; ++l) {
    std::cout << " " << adaptation_label_name(static_cast<AdaptationLabel>(l)) << "="
              << pred.probabilities[static_cast<size_t>(l)];
  }
  std::cout << "\n";
  if (pred.explanation) {
    std::cout << "explanation: " << render_explanation(*pred.explanation) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string persona, cache, scorer_id, out, table_out, conditions = "taaco", transcripts;
  std::string sizes = "10,20,30,40";
  int k = 5;
  uint64_t seed = 0;
  int epochs = 1700;
  double lr = 1e-4;
  double lambda = 20.0;
  int n_aug = 4;
  int eval_aug = 2;
  int threads = 0;
  CommonModelFlags model;
};

int run_evaluate(const EvaluateArgs& args) {
  PersonaDataset persona = load_persona(args.persona);
  ScoreCache cache = ScoreCache::open(args.cache);
  auto embedder = make_embedder(args.model.embeddings, args.model.embed_seed, args.model.lm_dim);

  EvalConfig config;
  config.k = args.k;
  config.seed = args.seed;
  config.sizes.clear();
  for (const std::string& s : csv_list(args.sizes)) config.sizes.push_back(std::stoi(s));
  config.model = args.model.to_config(args.seed);
  config.train.epochs = args.epochs;
  config.train.lr = args.lr;
  config.train.lambda = args.lambda;
  config.n_aug = args.n_aug;
  config.eval_aug = args.eval_aug;
  config.threads = args.threads;

  TranscriptCache transcripts;
  std::unique_ptr<TranscriptReplayClient> fewshot;
  std::vector<EvaluationReport> reports;
  for (const std::string& name : csv_list(args.conditions)) {
    Condition condition = parse_condition(name);
    if (condition == Condition::Llm) {
      if (args.transcripts.empty()) {
        raise(ErrorCode::InvalidArgument, "llm condition needs --transcripts");
      }
      transcripts = TranscriptCache::open(args.transcripts);
      fewshot = std::make_unique<TranscriptReplayClient>("fewshot", transcripts);
      config.fewshot_client = fewshot.get();
    }
    reports.push_back(
        run_feedback_curve(persona, cache, args.scorer_id, embedder, condition, config));
  }
  EvaluationReport merged = merge_reports(reports);
  write_report(merged, args.out);
  if (!args.table_out.empty()) {
    std::ofstream table(args.table_out, std::ios::trunc);
    if (!table.is_open()) raise(ErrorCode::IoError, "cannot write " + args.table_out);
    table << report_to_table(merged);
  }

  for (const MetricRow& row : merged.rows) {
    if (row.fold != -1) continue;
    std::cout << row.condition << " size " << row.size << ": accuracy " << row.accuracy;
    if (row.explanation_accuracy) {
      std::cout << ", explanation accuracy " << *row.explanation_accuracy << " ("
                << row.explanation_eligible << " eligible)";
    }
    std::cout << "\n";
  }
  std::cout << "report written to " << args.out << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out, cache_out, noisy_cache_out, noisy_scorer_id = "synthetic-noisy";
  uint64_t seed = 0;
  int persona_index = 0;
  int tasks = 60;
  double explanation_fraction = 0.6;
  double noise = 0.15;
};

int run_synth(const SynthArgs& args) {
  SyntheticSpec spec =
      make_synthetic_spec(args.persona_index, args.seed, args.tasks, args.explanation_fraction);
  SyntheticResult result = generate_synthetic_persona(spec);
  save_persona(result.dataset, args.out);
  result.oracle_cache.save_as(args.cache_out);
  std::cout << "persona '" << result.dataset.persona_id << "': " << result.dataset.tasks.size()
            << " tasks, " << result.dataset.total_feedback() << " feedback samples, "
            << result.dataset.vocabulary.total() << " concepts\n";
  std::cout << "oracle cache: " << result.oracle_cache.size() << " entries -> " << args.cache_out
            << "\n";
  if (!args.noisy_cache_out.empty()) {
    ScoreCache noisy = corrupt_cache(result.oracle_cache, args.noise,
                                     mix_seed({args.seed, 0x9015E}), args.noisy_scorer_id);
    noisy.save_as(args.noisy_cache_out);
    std::cout << "noisy cache (flip " << args.noise << "): -> " << args.noisy_cache_out << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// teach
// ---------------------------------------------------------------------------

struct TeachArgs {
  std::string persona, base_concepts, checkpoint, cache, scorer_id;
  std::string state_variables =
      "weekend,user is asleep,user is close by,guests are present,user is in a rush,"
      "adverse weather,daytime,house is tidy";
  bool init = false;
  bool retrain = false;
  uint64_t seed = 0;
  int epochs = 1700;
  double lr = 1e-4;
  double lambda = 20.0;
  int n_aug = 4;
  CommonModelFlags model;
};

std::optional<std::string> prompt_line(const std::string& prompt) {
  std::cout << prompt << std::flush;
  std::string line;
  if (!std::getline(std::cin, line)) return std::nullopt;
  return line;
}

// Explanation syntax: items separated by ';'. Component items are
// "type|component|concept", state items are "state|variable".
std::vector<ExplanationItem> parse_explanation_items(const std::string& text) {
  std::vector<ExplanationItem> items;
  if (display_normalize(text).empty()) return items;
  for (const std::string& raw : split(text, ';')) {
    if (display_normalize(raw).empty()) continue;
    auto fields = split(raw, '|');
    for (std::string& f : fields) f = display_normalize(f);
    if (fields.size() == 2 && match_key(fields[0]) == "state") {
      items.push_back(ExplanationItem::for_state(fields[1]));
      continue;
    }
    if (fields.size() != 3) {
      raise(ErrorCode::ParseError,
            "expected 'type|component|concept' or 'state|variable', got '" + raw + "'");
    }
    ComponentType type = parse_component_type(fields[0]);
    if (type == ComponentType::State || fields[2].empty()) {
      raise(ErrorCode::ParseError, "bad explanation item '" + raw + "'");
    }
    items.push_back(ExplanationItem::for_component(fields[1], type, fields[2]));
  }
  return items;
}

int run_teach(const TeachArgs& args) {
  PersonaDataset persona;
  if (args.init && !std::filesystem::exists(args.persona)) {
    persona.persona_id = std::filesystem::path(args.persona).stem().string();
    persona.state_space.variables = csv_list(args.state_variables);
    if (!args.base_concepts.empty()) {
      persona.vocabulary = load_base_concepts(args.base_concepts);
    }
    save_persona(persona, args.persona);
    std::cout << "initialized persona file " << args.persona << "\n";
  } else {
    persona = load_persona(args.persona);
  }

  int added = 0;
  for (;;) {
    std::cout << "\n--- new feedback (" << persona.persona_id << ") ---\n";
    FeedbackSample sample;
    TaskDescription task;

    // Task fields; re-prompt on validation errors, never write bad input.
    for (;;) {
      auto action = prompt_line("task action: ");
      if (!action) goto done;
      auto activity = prompt_line("high-level activity: ");
      if (!activity) goto done;
      auto objects = prompt_line("objects (comma-separated): ");
      if (!objects) goto done;
      auto locations = prompt_line("locations (comma-separated): ");
      if (!locations) goto done;
      task.action = *action;
      task.activity = *activity;
      task.objects = csv_list(*objects);
      task.locations = csv_list(*locations);
      task.id = "taught_" + std::to_string(persona.tasks.size());
      try {
        task = validate_task(task);
        break;
      } catch (const Error& e) {
        std::cout << "invalid task (" << e.what() << "), try again\n";
      }
    }
    sample.task = task;

    for (;;) {
      auto answer = prompt_line("adaptation [do_now|do_later|remind|no_action]: ");
      if (!answer) goto done;
      try {
        sample.adaptation = parse_adaptation_label(*answer);
        break;
      } catch (const Error&) {
        std::cout << "not a valid adaptation, try again\n";
      }
    }

    for (;;) {
      auto answer = prompt_line("state constraint (name=true,... or empty): ");
      if (!answer) goto done;
      try {
        StateConstraint constraint = parse_bindings(*answer);
        for (const auto& [name, value] : constraint.bindings) {
          (void)value;
          if (!persona.state_space.index_of(name)) {
            raise(ErrorCode::UnknownVariable, "unknown state variable '" + name + "'");
          }
        }
        if (!constraint.empty()) sample.constraint = std::move(constraint);
        break;
      } catch (const Error& e) {
        std::cout << "invalid constraint (" << e.what() << "), try again\n";
      }
    }

    for (;;) {
      auto answer =
          prompt_line("explanation (type|component|concept; state|variable; ... or empty): ");
      if (!answer) goto done;
      try {
        auto items = parse_explanation_items(*answer);
        if (!items.empty()) sample.explanation = std::move(items);
        FeedbackSample probe = sample;
        validate_feedback(probe, persona.state_space);
        break;
      } catch (const Error& e) {
        sample.explanation.reset();
        std::cout << "invalid explanation (" << e.what() << "), try again\n";
      }
    }

    {
      PersonaTask pt;
      pt.task = task;
      pt.feedback.push_back(sample);
      persona.tasks.push_back(std::move(pt));
      if (sample.explanation) {
        extend_vocabulary(persona.vocabulary, {sample});
      }
      save_persona(persona, args.persona);
      ++added;
      std::cout << "recorded; persona file updated (" << persona.tasks.size() << " tasks)\n";
    }

    auto more = prompt_line("add another? [y/N]: ");
    if (!more) break;
    bool yes = false;
    if (!parse_bool_word(*more, yes) || !yes) break;
  }
done:
  std::cout << "\nadded " << added << " feedback samples\n";

  if (args.retrain && added > 0) {
    if (args.checkpoint.empty() || args.cache.empty() || args.scorer_id.empty()) {
      raise(ErrorCode::InvalidArgument, "--retrain needs --checkpoint, --cache and --scorer-id");
    }
    TrainArgs train;
    train.persona = args.persona;
    train.cache = args.cache;
    train.checkpoint = args.checkpoint;
    train.scorer_id = args.scorer_id;
    train.seed = args.seed;
    train.epochs = args.epochs;
    train.lr = args.lr;
    train.lambda = args.lambda;
    train.n_aug = args.n_aug;
    train.model = args.model;
    return run_train(train);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"taaco - preference personalization for household robot task adaptation"};
  app.require_subcommand(1);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Warm or verify the concept score cache");
  score_cmd->add_option("--persona", score.persona, "Persona file")->required();
  score_cmd->add_option("--cache", score.cache, "Score cache (JSONL)")->required();
  score_cmd->add_option("--mode", score.mode, "live or replay")
      ->check(CLI::IsMember({"live", "replay"}));
  score_cmd->add_option("--scorer-id", score.scorer_id, "Cache scorer id (replay mode)");
  score_cmd->add_option("--endpoint", score.endpoint, "Chat-completions endpoint URL");
  score_cmd->add_option("--model", score.model, "Model identifier");
  score_cmd->add_option("--timeout", score.timeout, "Request timeout seconds");
  score_cmd->add_option("--concurrency", score.concurrency, "Max concurrent requests");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--persona", train.persona)->required();
  train_cmd->add_option("--cache", train.cache)->required();
  train_cmd->add_option("--checkpoint", train.checkpoint)->required();
  train_cmd->add_option("--scorer-id", train.scorer_id)->required();
  train_cmd->add_option("--seed", train.seed);
  train_cmd->add_option("--epochs", train.epochs);
  train_cmd->add_option("--lr", train.lr);
  train_cmd->add_option("--lambda", train.lambda);
  train_cmd->add_option("--n-aug", train.n_aug);
  train_cmd->add_option("--log-every", train.log_every);
  train.model.attach(train_cmd);

  PredictArgs predict;
  auto* predict_cmd = app.add_subcommand("predict", "Predict the adaptation for one task");
  predict_cmd->add_option("--checkpoint", predict.checkpoint)->required();
  predict_cmd->add_option("--cache", predict.cache)->required();
  predict_cmd->add_option("--scorer-id", predict.scorer_id)->required();
  predict_cmd->add_option("--persona", predict.persona,
                          "Persona file to cross-check the checkpoint against");
  predict_cmd->add_option("--task-id", predict.task_id, "Task id within --persona");
  predict_cmd->add_option("--task-file", predict.task_file, "JSON task file");
  predict_cmd->add_option("--action", predict.action);
  predict_cmd->add_option("--activity", predict.activity);
  predict_cmd->add_option("--objects", predict.objects, "Comma-separated");
  predict_cmd->add_option("--locations", predict.locations, "Comma-separated");
  predict_cmd->add_option("--state", predict.state, "name=true,... (unset variables are false)");
  predict_cmd->add_option("--embeddings", predict.embeddings, "Embedding table file");

  EvaluateArgs evaluate;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Run feedback-size curves, ablations and baselines");
  evaluate_cmd->add_option("--persona", evaluate.persona)->required();
  evaluate_cmd->add_option("--cache", evaluate.cache)->required();
  evaluate_cmd->add_option("--scorer-id", evaluate.scorer_id)->required();
  evaluate_cmd->add_option("--out", evaluate.out)->required();
  evaluate_cmd->add_option("--sizes", evaluate.sizes, "Comma-separated feedback sizes");
  evaluate_cmd->add_option("--k", evaluate.k, "Cross-validation folds");
  evaluate_cmd->add_option("--seed", evaluate.seed);
  evaluate_cmd->add_option("--conditions", evaluate.conditions,
                           "Comma-separated: taaco,oracle,rules,llm,no_concepts,"
                           "no_concept_training");
  evaluate_cmd->add_option("--table", evaluate.table_out, "Also write a TSV table");
  evaluate_cmd->add_option("--transcripts", evaluate.transcripts,
                           "Few-shot transcript file (llm condition)");
  evaluate_cmd->add_option("--epochs", evaluate.epochs);
  evaluate_cmd->add_option("--lr", evaluate.lr);
  evaluate_cmd->add_option("--lambda", evaluate.lambda);
  evaluate_cmd->add_option("--n-aug", evaluate.n_aug);
  evaluate_cmd->add_option("--eval-aug", evaluate.eval_aug);
  evaluate_cmd->add_option("--threads", evaluate.threads);
  evaluate.model.attach(evaluate_cmd);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic persona + oracle cache");
  synth_cmd->add_option("--out", synth.out)->required();
  synth_cmd->add_option("--cache-out", synth.cache_out)->required();
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--persona-index", synth.persona_index);
  synth_cmd->add_option("--tasks", synth.tasks);
  synth_cmd->add_option("--explanation-fraction", synth.explanation_fraction);
  synth_cmd->add_option("--noise", synth.noise, "Flip probability for the noisy cache");
  synth_cmd->add_option("--noisy-cache-out", synth.noisy_cache_out);
  synth_cmd->add_option("--noisy-scorer-id", synth.noisy_scorer_id);

  TeachArgs teach;
  auto* teach_cmd = app.add_subcommand("teach", "Interactively collect feedback");
  teach_cmd->add_option("--persona", teach.persona)->required();
  teach_cmd->add_flag("--init", teach.init, "Create the persona file if missing");
  teach_cmd->add_option("--state-variables", teach.state_variables, "For --init");
  teach_cmd->add_option("--base-concepts", teach.base_concepts, "Factory concept file for --init");
  teach_cmd->add_flag("--retrain", teach.retrain, "Retrain after the session");
  teach_cmd->add_option("--checkpoint", teach.checkpoint);
  teach_cmd->add_option("--cache", teach.cache);
  teach_cmd->add_option("--scorer-id", teach.scorer_id);
  teach_cmd->add_option("--seed", teach.seed);
  teach_cmd->add_option("--epochs", teach.epochs);
  teach_cmd->add_option("--lr", teach.lr);
  teach_cmd->add_option("--lambda", teach.lambda);
  teach_cmd->add_option("--n-aug", teach.n_aug);
  teach.model.attach(teach_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << "\n";
    return 2;
  }

  try {
    if (score_cmd->parsed()) return run_score(score);
    if (train_cmd->parsed()) return run_train(train);
    if (predict_cmd->parsed()) return run_predict(predict);
    if (evaluate_cmd->parsed()) return run_evaluate(evaluate);
    if (synth_cmd->parsed()) return run_synth(synth);
    if (teach_cmd->parsed()) return run_teach(teach);
  } catch (const taaco::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
