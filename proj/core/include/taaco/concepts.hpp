#pragma once

#include <array>
#include <string>
#include <vector>

#include "taaco/domain.hpp"

namespace taaco {

/// An abstract property of a task component, e.g. "involves an open flame".
struct Concept {
  std::string text;
  ComponentType type = ComponentType::Action;
  bool user_added = false;  // base (factory) concepts vs concepts added from feedback
};

/// Per-type ordered lists of concepts. Ordering is fixed per persona: the
/// tokenizer and checkpoints depend on it.
class ConceptVocabulary {
 public:
  // Appends unless a concept with the same (type, normalized text) exists.
  // Returns true when added.
  bool add(ComponentType type, const std::string& text, bool user_added = false);

  bool contains(ComponentType type, const std::string& text) const;

  const std::vector<Concept>& of_type(ComponentType type) const;

  size_t total() const;

  // All concepts in canonical order: action, activity, object, location lists.
  std::vector<Concept> all() const;

  bool operator==(const ConceptVocabulary& other) const;

 private:
  std::array<std::vector<Concept>, kNumConceptTypes> per_type_;
};

// Concepts mentioned in feedback explanations that are absent from the
// vocabulary are appended (marked user-added). Returns the additions so the
// caller can rescore affected pairs.
std::vector<Concept> extend_vocabulary(ConceptVocabulary& vocab,
                                       const std::vector<FeedbackSample>& feedback);

}  // namespace taaco
