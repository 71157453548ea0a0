#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taaco/dataio.hpp"
#include "taaco/score_cache.hpp"

namespace taaco {

/// One preference rule of a synthetic persona: fires when every listed
/// (type, concept) is true for some task component and the optional state
/// condition holds. An empty concept list is the terminating default.
struct SynthRule {
  std::vector<std::pair<ComponentType, std::string>> concepts;
  std::optional<std::pair<std::string, bool>> state_condition;
  AdaptationLabel label = AdaptationLabel::DoNow;
};

/// Fully-specified generator input: component pools, a concept truth table,
/// and an ordered first-match rule list. The generated labels are exactly
/// reproducible from this spec, which makes the generator its own oracle.
struct SyntheticSpec {
  uint64_t seed = 0;
  std::string persona_id = "synthetic";
  std::array<std::vector<std::string>, kNumConceptTypes> pools;
  std::array<std::vector<std::string>, kNumConceptTypes> concepts;
  // truth[t][pool_index * concepts[t].size() + concept_index]
  std::array<std::vector<uint8_t>, kNumConceptTypes> truth;
  std::vector<std::string> state_variables;
  std::vector<SynthRule> rules;
  int task_count = 60;
  int min_objects = 1;
  int max_objects = 2;
  double explanation_fraction = 0.6;
  std::string scorer_id = "synthetic-oracle";

  void validate() const;
  bool truth_of(ComponentType type, const std::string& component,
                const std::string& concept_text) const;
};

struct RuleTraceEntry {
  std::string task_id;
  int sample_index = 0;
  int rule_index = 0;
  std::map<std::string, bool> constraint;  // the sample's constrained variables
};

struct SyntheticResult {
  PersonaDataset dataset;
  ScoreCache oracle_cache;  // in-memory; raw 10 where the truth table is true, else 1
  std::vector<RuleTraceEntry> trace;
};

SyntheticResult generate_synthetic_persona(const SyntheticSpec& spec);

// Independent first-match evaluation of the spec's rules for one concrete
// (task, state); the oracle used to cross-check generated labels.
AdaptationLabel synthetic_label(const SyntheticSpec& spec, const TaskDescription& task,
                                const StateSpace& space, const StateVector& state);

// The default persona family used by `taaco synth` and the acceptance runs:
// 8 state variables, ~25 concepts, 6 rules, unique actions, shared
// activities/objects/locations.
SyntheticSpec make_synthetic_spec(int persona_index, uint64_t seed, int task_count = 60,
                                  double explanation_fraction = 0.6);

// Copy of a cache with every score flipped to the wrong extreme with the given
// probability. Entries are re-keyed under new_scorer_id.
ScoreCache corrupt_cache(const ScoreCache& cache, double flip_prob, uint64_t seed,
                         const std::string& new_scorer_id);

}  // namespace taaco
