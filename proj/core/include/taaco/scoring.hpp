#pragma once

#include <string>
#include <vector>

#include "taaco/concepts.hpp"
#include "taaco/domain.hpp"
#include "taaco/llm_client.hpp"
#include "taaco/score_cache.hpp"

namespace taaco {

/// The concept-mediated view of one task: a match score in [0,1] for every
/// (component instance, same-type concept) pair. Entry order is deterministic:
/// components in task order, concepts in vocabulary order.
struct ScoredEntry {
  std::string component;
  ComponentType type = ComponentType::Action;
  std::string concept_text;
  double match = 0.0;
};

struct ScoredRepresentation {
  std::vector<ScoredEntry> entries;
};

// m = (raw - 1) / 9. Raw values outside [1,10] are clamped with a warning.
double rescale_score(int raw);

// The fixed single-pair prompt sent to the scoring service.
std::string score_prompt(ComponentType type, const std::string& component,
                         const std::string& concept_text);

enum class ScoreMode { Strict, Lenient };

// Cache hit returns the cached value with no client call. On a miss, issues
// one prompt, parses the first integer, retries once on parse failure, then
// records raw 1 with a warning. Transport errors surface in strict mode and
// degrade to raw 1 (uncached) in lenient mode.
int score_pair(const std::string& component, ComponentType type, const Concept& concept_def,
               CompletionClient& client, ScoreCache& cache, ScoreMode mode = ScoreMode::Strict);

ScoredRepresentation build_representation(const TaskDescription& task,
                                          const ConceptVocabulary& vocab,
                                          CompletionClient& client, ScoreCache& cache,
                                          ScoreMode mode = ScoreMode::Strict);

// Sets the match of every entry named by a component-form explanation item to
// 1.0 (the defined maximum); state-form items are ignored. Throws
// MissingConcept when an item's concept is not in the vocabulary.
ScoredRepresentation apply_oracle(const ScoredRepresentation& rep,
                                  const std::vector<ExplanationItem>& explanation,
                                  const ConceptVocabulary& vocab);

// Scores every (component, same-type concept) pair of every task, issuing
// misses concurrently up to max_concurrent. Returns the number of client calls
// made.
int warm_cache(const std::vector<TaskDescription>& tasks, const ConceptVocabulary& vocab,
               CompletionClient& client, ScoreCache& cache, int max_concurrent = 4,
               ScoreMode mode = ScoreMode::Strict);

}  // namespace taaco
