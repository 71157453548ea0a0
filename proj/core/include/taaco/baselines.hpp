#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taaco/domain.hpp"
#include "taaco/llm_client.hpp"

namespace taaco {

/// End-user-programming style rule: fires when the task contains the named
/// component (exact normalized text) and the optional state condition holds.
struct Rule {
  ComponentType component_type = ComponentType::Action;
  std::string component_text;  // normalized
  std::optional<std::pair<std::string, bool>> state_condition;
  AdaptationLabel label = AdaptationLabel::DoNow;
  std::string source_sample;

  bool same_condition_and_label(const Rule& other) const;
};

struct RuleSet {
  std::vector<Rule> rules;  // deduplicated on (condition, label)
  AdaptationLabel default_label = AdaptationLabel::DoNow;
};

// Builds rules from training explanations: one rule per component-form item;
// samples with a state constraint additionally emit the same rules with each
// constrained (variable, value) attached. Samples without explanations yield
// nothing.
RuleSet induce_rules(const std::vector<FeedbackSample>& train);

struct RulePrediction {
  AdaptationLabel label = AdaptationLabel::DoNow;
  const Rule* used = nullptr;  // null when the default fired
};

// Majority vote over applicable rules; ties break toward inaction
// (no_action > remind > do_later > do_now). No applicable rule returns the
// default label with no citation.
RulePrediction rule_predict(const RuleSet& rules, const TaskDescription& task,
                            const StateSpace& space, const StateVector& state);

// ---------------------------------------------------------------------------
// Few-shot LLM baseline
// ---------------------------------------------------------------------------

// Deterministic prompt: the full feedback history (task fields, constraint,
// label, explanations), the query task and state, and the answer-format
// instructions.
std::string build_fewshot_prompt(const std::vector<FeedbackSample>& history,
                                 const StateSpace& space, const TaskDescription& query_task,
                                 const StateVector& query_state);

struct ParsedResponse {
  AdaptationLabel label = AdaptationLabel::DoNow;
  std::optional<std::string> explanation;
};

// Reads the "adaptation:" line when present, otherwise scans for the first
// canonical label substring. Throws Unparseable when no label is found.
ParsedResponse parse_llm_response(const std::string& text);

}  // namespace taaco
