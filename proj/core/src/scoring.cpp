#include "taaco/scoring.hpp"

#include <atomic>
#include <iostream>
#include <thread>

#include "taaco/text.hpp"

namespace taaco {

double rescale_score(int raw) {
  if (raw < 1 || raw > 10) {
    std::cerr << "[taaco] warning: raw score " << raw << " outside 1..10, clamping\n";
    raw = raw < 1 ? 1 : 10;
  }
  return static_cast<double>(raw - 1) / 9.0;
}

std::string score_prompt(ComponentType type, const std::string& component,
                         const std::string& concept_text) {
  std::string out = "On a scale of 1 to 10, how well does the ";
  out += component_type_name(type);
  out += " '";
  out += component;
  out += "' match the description: it ";
  out += concept_text;
  out += "? Answer with a single integer.";
  return out;
}

namespace {

int clamp_raw(int raw, const std::string& component, const std::string& concept_text) {
  if (raw >= 1 && raw <= 10) return raw;
  std::cerr << "[taaco] warning: scorer returned " << raw << " for ('" << component << "', '"
            << concept_text << "'), clamping to 1..10\n";
  return raw < 1 ? 1 : 10;
}

}  // namespace

int score_pair(const std::string& component, ComponentType type, const Concept& concept_def,
               CompletionClient& client, ScoreCache& cache, ScoreMode mode) {
  if (concept_def.type != type) {
    raise(ErrorCode::InvalidArgument,
          "concept '" + concept_def.text + "' has type " + component_type_name(concept_def.type) +
              ", component is " + component_type_name(type));
  }
  std::string comp_key = match_key(component);
  std::string concept_key = match_key(concept_def.text);
  if (auto hit = cache.lookup(client.scorer_id(), type, comp_key, concept_key)) return *hit;

  std::string prompt = score_prompt(type, component, concept_def.text);
  std::optional<int> parsed;
  for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
    std::string response;
    try {
      response = client.complete(prompt);
    } catch (const Error& e) {
      if (mode == ScoreMode::Strict) throw;
      std::cerr << "[taaco] warning: transport failure scoring ('" << component << "', '"
                << concept_def.text << "'): " << e.what() << "; using raw 1\n";
      return 1;  // transient: not cached
    }
    parsed = parse_first_int(response);
  }
  int raw;
  if (parsed) {
    raw = clamp_raw(*parsed, component, concept_def.text);
  } else {
    std::cerr << "[taaco] warning: unparseable score response for ('" << component << "', '"
              << concept_def.text << "') after retry; recording raw 1\n";
    raw = 1;
  }
  cache.put({client.scorer_id(), type, comp_key, concept_key, raw});
  return raw;
}

ScoredRepresentation build_representation(const TaskDescription& task,
                                          const ConceptVocabulary& vocab,
                                          CompletionClient& client, ScoreCache& cache,
                                          ScoreMode mode) {
  ScoredRepresentation rep;
  for (const auto& [type, component] : task.components()) {
    for (const Concept& concept_def : vocab.of_type(type)) {
      int raw = score_pair(component, type, concept_def, client, cache, mode);
      rep.entries.push_back({component, type, concept_def.text, rescale_score(raw)});
    }
  }
  return rep;
}

ScoredRepresentation apply_oracle(const ScoredRepresentation& rep,
                                  const std::vector<ExplanationItem>& explanation,
                                  const ConceptVocabulary& vocab) {
  ScoredRepresentation out = rep;
  for (const auto& item : explanation) {
    if (item.kind != ExplanationItem::Kind::Component) continue;
    if (!vocab.contains(item.component_type, item.concept_text)) {
      raise(ErrorCode::MissingConcept,
            "'" + item.concept_text + "' (" + component_type_name(item.component_type) +
                ") is not in the vocabulary");
    }
    std::string comp_key = match_key(item.component);
    std::string concept_key = match_key(item.concept_text);
    bool found = false;
    for (auto& entry : out.entries) {
      if (entry.type == item.component_type && match_key(entry.component) == comp_key &&
          match_key(entry.concept_text) == concept_key) {
        entry.match = 1.0;
        found = true;
      }
    }
    if (!found) {
      raise(ErrorCode::DanglingExplanation,
            "explanation names component '" + item.component + "' not present in the representation");
    }
  }
  return out;
}

int warm_cache(const std::vector<TaskDescription>& tasks, const ConceptVocabulary& vocab,
               CompletionClient& client, ScoreCache& cache, int max_concurrent, ScoreMode mode) {
  // Distinct pending pairs, deterministic order.
  std::vector<std::pair<std::string, const Concept*>> pending;
  std::unordered_map<std::string, bool> seen;
  for (const auto& task : tasks) {
    for (const auto& [type, component] : task.components()) {
      for (const Concept& concept_def : vocab.of_type(type)) {
        std::string key = std::string(component_type_name(type)) + '\x1f' + match_key(component) +
                          '\x1f' + match_key(concept_def.text);
        if (seen.emplace(key, true).second &&
            !cache.lookup(client.scorer_id(), type, component, concept_def.text)) {
          pending.emplace_back(component, &concept_def);
        }
      }
    }
  }

  int before = client.calls();
  int workers = std::max(1, std::min<int>(max_concurrent, static_cast<int>(pending.size())));
  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= pending.size() || failed.load()) return;
        try {
          score_pair(pending[i].first, pending[i].second->type, *pending[i].second, client, cache,
                     mode);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!failed.exchange(true)) first_error = e.what();
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failed.load()) raise(ErrorCode::TransportError, "cache warm failed: " + first_error);
  return client.calls() - before;
}

}  // namespace taaco
