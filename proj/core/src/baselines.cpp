#include "taaco/baselines.hpp"

#include <algorithm>
#include <array>

#include "taaco/text.hpp"

namespace taaco {

bool Rule::same_condition_and_label(const Rule& other) const {
  return component_type == other.component_type && component_text == other.component_text &&
         state_condition == other.state_condition && label == other.label;
}

RuleSet induce_rules(const std::vector<FeedbackSample>& train) {
  RuleSet set;
  auto add_unique = [&set](const Rule& rule) {
    for (const Rule& existing : set.rules) {
      if (existing.same_condition_and_label(rule)) return;
    }
    set.rules.push_back(rule);
  };
  for (const FeedbackSample& sample : train) {
    if (!sample.has_explanation()) continue;
    for (const ExplanationItem& item : *sample.explanation) {
      if (item.kind != ExplanationItem::Kind::Component) continue;
      Rule rule;
      rule.component_type = item.component_type;
      rule.component_text = match_key(item.component);
      rule.label = sample.adaptation;
      rule.source_sample = sample.task.id;
      add_unique(rule);
      if (sample.has_constraint()) {
        for (const auto& [name, value] : sample.constraint->bindings) {
          Rule conditioned = rule;
          conditioned.state_condition = std::make_pair(match_key(name), value);
          add_unique(conditioned);
        }
      }
    }
  }
  return set;
}

namespace {

// Higher is more conservative; used for majority-vote tie-breaks.
int conservativeness(AdaptationLabel label) {
  switch (label) {
    case AdaptationLabel::NoAction: return 3;
    case AdaptationLabel::Remind: return 2;
    case AdaptationLabel::DoLater: return 1;
    case AdaptationLabel::DoNow: return 0;
  }
  return 0;
}

}  // namespace

RulePrediction rule_predict(const RuleSet& rules, const TaskDescription& task,
                            const StateSpace& space, const StateVector& state) {
  auto components = task.components();
  std::vector<const Rule*> applicable;
  for (const Rule& rule : rules.rules) {
    bool component_hit = std::any_of(components.begin(), components.end(), [&](const auto& c) {
      return c.first == rule.component_type && match_key(c.second) == rule.component_text;
    });
    if (!component_hit) continue;
    if (rule.state_condition) {
      StateConstraint constraint;
      constraint.bindings[rule.state_condition->first] = rule.state_condition->second;
      if (!state_satisfies(space, state, constraint)) continue;
    }
    applicable.push_back(&rule);
  }
  if (applicable.empty()) return {rules.default_label, nullptr};

  std::array<int, kNumLabels> votes{};
  for (const Rule* rule : applicable) votes[static_cast<size_t>(rule->label)]++;
  AdaptationLabel winner = AdaptationLabel::DoNow;
  int best_votes = -1;
  int best_rank = -1;
  for (int l = 0; l < kNumLabels; ++l) {
    auto label = static_cast<AdaptationLabel>(l);
    int v = votes[static_cast<size_t>(l)];
    int rank = conservativeness(label);
    if (v > best_votes || (v == best_votes && rank > best_rank)) {
      best_votes = v;
      best_rank = rank;
      winner = label;
    }
  }
  for (const Rule* rule : applicable) {
    if (rule->label == winner) return {winner, rule};
  }
  return {winner, nullptr};
}

// ---------------------------------------------------------------------------
// Few-shot prompt
// ---------------------------------------------------------------------------

namespace {

void append_task(std::string& out, const TaskDescription& task) {
  out += "task: " + task.action + " | activity: " + task.activity + " | objects: " +
         join(task.objects, ", ") + " | locations: " + join(task.locations, ", ") + "\n";
}

std::string constraint_text(const std::optional<StateConstraint>& constraint) {
  if (!constraint || constraint->empty()) return "-";
  std::vector<std::string> parts;
  for (const auto& [name, value] : constraint->bindings) {
    parts.push_back(name + "=" + (value ? "true" : "false"));
  }
  return join(parts, ", ");
}

}  // namespace

std::string build_fewshot_prompt(const std::vector<FeedbackSample>& history,
                                 const StateSpace& space, const TaskDescription& query_task,
                                 const StateVector& query_state) {
  std::string out =
      "You decide how a household robot should adapt to tasks for one particular user.\n"
      "The adaptation is one of: do_now, do_later, remind, no_action.\n\n"
      "Feedback history:\n";
  if (history.empty()) out += "(none)\n";
  for (size_t i = 0; i < history.size(); ++i) {
    const FeedbackSample& sample = history[i];
    out += "[" + std::to_string(i + 1) + "] ";
    append_task(out, sample.task);
    out += "    applies when: " + constraint_text(sample.constraint) + "\n";
    out += "    adaptation: " + std::string(adaptation_label_name(sample.adaptation)) + "\n";
    std::string expl = "-";
    if (sample.has_explanation()) {
      std::vector<std::string> parts;
      for (const ExplanationItem& item : *sample.explanation) {
        parts.push_back(render_explanation(item));
      }
      expl = join(parts, "; ");
    }
    out += "    explanation: " + expl + "\n";
  }
  out += "\nQuery:\n";
  append_task(out, query_task);
  out += "state: ";
  std::vector<std::string> state_parts;
  for (size_t i = 0; i < space.size(); ++i) {
    state_parts.push_back(space.variables[i] + "=" +
                          (query_state.values[i] ? "true" : "false"));
  }
  out += join(state_parts, ", ") + "\n\n";
  out +=
      "Answer with exactly two lines:\n"
      "adaptation: <one of do_now, do_later, remind, no_action>\n"
      "explanation: <component>: <concept>\n";
  return out;
}

ParsedResponse parse_llm_response(const std::string& text) {
  ParsedResponse result;
  std::optional<AdaptationLabel> label;
  std::string lower = to_lower(text);

  auto adaptation_pos = lower.find("adaptation:");
  if (adaptation_pos != std::string::npos) {
    auto line_end = lower.find('\n', adaptation_pos);
    std::string value = text.substr(adaptation_pos + 11,
                                    (line_end == std::string::npos ? text.size() : line_end) -
                                        adaptation_pos - 11);
    try {
      label = parse_adaptation_label(value);
    } catch (const Error&) {
      // fall through to the substring scan
    }
  }
  if (!label) {
    size_t best_pos = std::string::npos;
    for (int l = 0; l < kNumLabels; ++l) {
      auto candidate = static_cast<AdaptationLabel>(l);
      size_t pos = lower.find(adaptation_label_name(candidate));
      if (pos != std::string::npos && (best_pos == std::string::npos || pos < best_pos)) {
        best_pos = pos;
        label = candidate;
      }
    }
  }
  if (!label) raise(ErrorCode::Unparseable, "no adaptation label in response");
  result.label = *label;

  auto explanation_pos = lower.find("explanation:");
  if (explanation_pos != std::string::npos) {
    auto line_end = text.find('\n', explanation_pos);
    std::string value = text.substr(explanation_pos + 12,
                                    (line_end == std::string::npos ? text.size() : line_end) -
                                        explanation_pos - 12);
    value = display_normalize(value);
    if (!value.empty()) result.explanation = value;
  }
  return result;
}

}  // namespace taaco
