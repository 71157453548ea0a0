#include "taaco/domain.hpp"

#include <algorithm>
#include <unordered_set>

#include "taaco/text.hpp"

namespace taaco {

const char* component_type_name(ComponentType type) {
  switch (type) {
    case ComponentType::Action: return "action";
    case ComponentType::Activity: return "activity";
    case ComponentType::Object: return "object";
    case ComponentType::Location: return "location";
    case ComponentType::State: return "state";
  }
  return "?";
}

ComponentType parse_component_type(const std::string& text) {
  std::string key = match_key(text);
  if (key == "action") return ComponentType::Action;
  if (key == "activity") return ComponentType::Activity;
  if (key == "object") return ComponentType::Object;
  if (key == "location") return ComponentType::Location;
  if (key == "state") return ComponentType::State;
  raise(ErrorCode::SchemaError, "unknown component type '" + text + "'");
}

const char* adaptation_label_name(AdaptationLabel label) {
  switch (label) {
    case AdaptationLabel::DoNow: return "do_now";
    case AdaptationLabel::DoLater: return "do_later";
    case AdaptationLabel::Remind: return "remind";
    case AdaptationLabel::NoAction: return "no_action";
  }
  return "?";
}

AdaptationLabel parse_adaptation_label(const std::string& text) {
  std::string key = match_key(text);
  if (key == "do_now") return AdaptationLabel::DoNow;
  if (key == "do_later") return AdaptationLabel::DoLater;
  if (key == "remind") return AdaptationLabel::Remind;
  if (key == "no_action") return AdaptationLabel::NoAction;
  raise(ErrorCode::UnknownLabel, "'" + text + "' is not an adaptation label");
}

std::vector<std::pair<ComponentType, std::string>> TaskDescription::components() const {
  std::vector<std::pair<ComponentType, std::string>> out;
  out.reserve(2 + objects.size() + locations.size());
  out.emplace_back(ComponentType::Action, action);
  out.emplace_back(ComponentType::Activity, activity);
  for (const auto& o : objects) out.emplace_back(ComponentType::Object, o);
  for (const auto& l : locations) out.emplace_back(ComponentType::Location, l);
  return out;
}

namespace {

std::vector<std::string> normalize_list(const std::vector<std::string>& in) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  out.reserve(in.size());
  for (const auto& raw : in) {
    std::string display = display_normalize(raw);
    if (display.empty()) continue;
    std::string key = to_lower(display);
    if (!seen.insert(key).second) {
      raise(ErrorCode::DuplicateComponent, key);
    }
    out.push_back(std::move(display));
  }
  return out;
}

}  // namespace

TaskDescription validate_task(const TaskDescription& task) {
  TaskDescription out;
  out.id = display_normalize(task.id);
  out.action = display_normalize(task.action);
  if (out.action.empty()) raise(ErrorCode::EmptyAction, "task action is empty");
  out.activity = display_normalize(task.activity);
  if (out.activity.empty()) raise(ErrorCode::EmptyActivity, "task activity is empty");
  out.objects = normalize_list(task.objects);
  out.locations = normalize_list(task.locations);
  return out;
}

std::optional<size_t> StateSpace::index_of(const std::string& name) const {
  std::string key = match_key(name);
  for (size_t i = 0; i < variables.size(); ++i) {
    if (match_key(variables[i]) == key) return i;
  }
  return std::nullopt;
}

void StateSpace::validate() const {
  std::unordered_set<std::string> seen;
  for (const auto& name : variables) {
    std::string key = match_key(name);
    if (key.empty()) raise(ErrorCode::SchemaError, "empty state variable name");
    if (!seen.insert(key).second) {
      raise(ErrorCode::SchemaError, "duplicate state variable '" + key + "'");
    }
  }
}

bool state_satisfies(const StateSpace& space, const StateVector& state,
                     const StateConstraint& constraint) {
  if (state.values.size() != space.size()) {
    raise(ErrorCode::StateSpaceMismatch, "state vector length does not match the state space");
  }
  for (const auto& [name, required] : constraint.bindings) {
    auto idx = space.index_of(name);
    if (!idx) raise(ErrorCode::UnknownVariable, "state variable '" + name + "'");
    if (state.values[*idx] != required) return false;
  }
  return true;
}

ExplanationItem ExplanationItem::for_component(std::string component, ComponentType type,
                                               std::string concept_text) {
  ExplanationItem item;
  item.kind = Kind::Component;
  item.component = display_normalize(component);
  item.component_type = type;
  item.concept_text = display_normalize(concept_text);
  return item;
}

ExplanationItem ExplanationItem::for_state(std::string variable) {
  ExplanationItem item;
  item.kind = Kind::State;
  item.state_variable = display_normalize(variable);
  return item;
}

bool ExplanationItem::matches(const ExplanationItem& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::State) return match_key(state_variable) == match_key(other.state_variable);
  if (component_type != other.component_type) return false;
  if (match_key(component) != match_key(other.component)) return false;
  // A component-only claim (empty concept) matches regardless of the concept
  // named on the other side.
  if (concept_text.empty() || other.concept_text.empty()) return true;
  return match_key(concept_text) == match_key(other.concept_text);
}

bool ExplanationItem::operator==(const ExplanationItem& other) const {
  if (kind != other.kind) return false;
  if (kind == Kind::State) return match_key(state_variable) == match_key(other.state_variable);
  return component_type == other.component_type &&
         match_key(component) == match_key(other.component) &&
         match_key(concept_text) == match_key(other.concept_text);
}

std::string render_explanation(const ExplanationItem& item) {
  if (item.kind == ExplanationItem::Kind::State) return item.state_variable;
  std::string type_word = component_type_name(item.component_type);
  if (item.concept_text.empty()) {
    std::string capitalized = type_word;
    if (!capitalized.empty()) capitalized[0] = static_cast<char>(std::toupper(capitalized[0]));
    return capitalized + " " + item.component + " is involved";
  }
  const char* article = (type_word == "location") ? "a" : "an";
  return item.component + " is " + article + " " + type_word + " which " + item.concept_text;
}

void validate_feedback(const FeedbackSample& sample, const StateSpace& space) {
  if (sample.constraint) {
    for (const auto& [name, value] : sample.constraint->bindings) {
      (void)value;
      if (!space.index_of(name)) {
        raise(ErrorCode::UnknownVariable, "constraint names unknown state variable '" + name + "'");
      }
    }
  }
  if (!sample.explanation) return;
  auto components = sample.task.components();
  for (const auto& item : *sample.explanation) {
    if (item.kind == ExplanationItem::Kind::State) {
      if (!space.index_of(item.state_variable)) {
        raise(ErrorCode::UnknownVariable,
              "explanation names unknown state variable '" + item.state_variable + "'");
      }
      continue;
    }
    if (item.component_type == ComponentType::State) {
      raise(ErrorCode::SchemaError, "component explanation cannot have type 'state'");
    }
    std::string key = match_key(item.component);
    bool found = std::any_of(components.begin(), components.end(), [&](const auto& c) {
      return c.first == item.component_type && match_key(c.second) == key;
    });
    if (!found) {
      raise(ErrorCode::DanglingExplanation,
            "explanation names " + std::string(component_type_name(item.component_type)) + " '" +
                item.component + "' which is not part of task '" + sample.task.id + "'");
    }
  }
}

}  // namespace taaco
