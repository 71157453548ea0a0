#include "taaco/concepts.hpp"

#include "taaco/text.hpp"

namespace taaco {

namespace {
size_t type_slot(ComponentType type) {
  auto idx = static_cast<size_t>(type);
  if (idx >= kNumConceptTypes) {
    raise(ErrorCode::InvalidArgument, "concepts cannot have type 'state'");
  }
  return idx;
}
}  // namespace

bool ConceptVocabulary::add(ComponentType type, const std::string& text, bool user_added) {
  std::string display = display_normalize(text);
  if (display.empty()) raise(ErrorCode::InvalidArgument, "empty concept text");
  if (contains(type, display)) return false;
  per_type_[type_slot(type)].push_back(Concept{display, type, user_added});
  return true;
}

bool ConceptVocabulary::contains(ComponentType type, const std::string& text) const {
  std::string key = match_key(text);
  for (const auto& c : per_type_[type_slot(type)]) {
    if (match_key(c.text) == key) return true;
  }
  return false;
}

const std::vector<Concept>& ConceptVocabulary::of_type(ComponentType type) const {
  return per_type_[type_slot(type)];
}

size_t ConceptVocabulary::total() const {
  size_t n = 0;
  for (const auto& list : per_type_) n += list.size();
  return n;
}

std::vector<Concept> ConceptVocabulary::all() const {
  std::vector<Concept> out;
  out.reserve(total());
  for (const auto& list : per_type_) out.insert(out.end(), list.begin(), list.end());
  return out;
}

bool ConceptVocabulary::operator==(const ConceptVocabulary& other) const {
  for (size_t t = 0; t < kNumConceptTypes; ++t) {
    const auto& a = per_type_[t];
    const auto& b = other.per_type_[t];
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (match_key(a[i].text) != match_key(b[i].text)) return false;
    }
  }
  return true;
}

std::vector<Concept> extend_vocabulary(ConceptVocabulary& vocab,
                                       const std::vector<FeedbackSample>& feedback) {
  std::vector<Concept> added;
  for (const auto& sample : feedback) {
    if (!sample.explanation) continue;
    for (const auto& item : *sample.explanation) {
      if (item.kind != ExplanationItem::Kind::Component) continue;
      if (item.concept_text.empty()) continue;
      if (vocab.add(item.component_type, item.concept_text, /*user_added=*/true)) {
        added.push_back(vocab.of_type(item.component_type).back());
      }
    }
  }
  return added;
}

}  // namespace taaco
