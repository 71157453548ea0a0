#pragma once

#include <string>
#include <vector>

#include "taaco/concepts.hpp"
#include "taaco/domain.hpp"

namespace taaco {

struct PersonaTask {
  TaskDescription task;
  std::vector<FeedbackSample> feedback;
};

/// One user's complete dataset: state space, concept vocabulary and
/// per-task feedback.
struct PersonaDataset {
  std::string persona_id;
  StateSpace state_space;
  ConceptVocabulary vocabulary;
  std::vector<PersonaTask> tasks;

  size_t total_feedback() const;
  std::vector<FeedbackSample> all_feedback() const;

  // Tasks normalized, labels valid, explanations reference task components and
  // known state variables, vocabulary covers every referenced concept.
  void validate() const;
};

PersonaDataset parse_persona_json(const std::string& text, const std::string& origin = "persona");
PersonaDataset load_persona(const std::string& path);
std::string persona_to_json(const PersonaDataset& dataset);
void save_persona(const PersonaDataset& dataset, const std::string& path);

// Factory concept file: {"action": [...], "activity": [...], ...}
ConceptVocabulary load_base_concepts(const std::string& path);

}  // namespace taaco
