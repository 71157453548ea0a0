#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taaco/errors.hpp"

namespace taaco {

enum class ComponentType { Action, Activity, Object, Location, State };
inline constexpr int kNumComponentTypes = 5;
// Types that task components (and concepts) can take; State is reserved for
// state-variable tokens.
inline constexpr int kNumConceptTypes = 4;

const char* component_type_name(ComponentType type);  // "action", "activity", ...
ComponentType parse_component_type(const std::string& text);

enum class AdaptationLabel { DoNow, DoLater, Remind, NoAction };
inline constexpr int kNumLabels = 4;

const char* adaptation_label_name(AdaptationLabel label);  // "do_now", ...
AdaptationLabel parse_adaptation_label(const std::string& text);

/// One task the robot might perform: a free-text action and activity plus the
/// objects and locations involved.
struct TaskDescription {
  std::string id;
  std::string action;
  std::string activity;
  std::vector<std::string> objects;
  std::vector<std::string> locations;

  // Component instances in canonical order: action, activity, objects, locations.
  std::vector<std::pair<ComponentType, std::string>> components() const;
};

// Returns a normalized copy (trimmed, internal whitespace collapsed, lists
// deduplicated case-insensitively). Throws EmptyAction / EmptyActivity /
// DuplicateComponent.
TaskDescription validate_task(const TaskDescription& task);

/// Ordered set of binary state variable names. Order is fixed per persona and
/// preserved in tokenization and checkpoints.
struct StateSpace {
  std::vector<std::string> variables;

  size_t size() const { return variables.size(); }
  std::optional<size_t> index_of(const std::string& name) const;
  void validate() const;  // names unique after normalization
};

struct StateVector {
  std::vector<bool> values;  // aligned to StateSpace::variables
};

/// Partial assignment of state variables delimiting where a preference applies.
struct StateConstraint {
  std::map<std::string, bool> bindings;

  bool empty() const { return bindings.empty(); }
};

// True iff every binding matches the state; an empty constraint is vacuously
// true. Throws UnknownVariable for bindings outside the space.
bool state_satisfies(const StateSpace& space, const StateVector& state,
                     const StateConstraint& constraint);

/// One element of an explanation: either a (component, concept) pair or a
/// state variable.
struct ExplanationItem {
  enum class Kind { Component, State };

  Kind kind = Kind::Component;
  std::string component;
  ComponentType component_type = ComponentType::Action;
  std::string concept_text;
  std::string state_variable;

  static ExplanationItem for_component(std::string component, ComponentType type,
                                       std::string concept_text);
  static ExplanationItem for_state(std::string variable);

  // Normalized (case-insensitive) equality. An item with an empty concept is a
  // component-only claim and matches any item naming the same component.
  bool matches(const ExplanationItem& other) const;

  bool operator==(const ExplanationItem& other) const;
};

// "drill is an object which can hurt someone" / "Object drill is involved" /
// "user is asleep" — the one-line rendering used by reports and the CLI.
std::string render_explanation(const ExplanationItem& item);

/// One unit of user feedback: the preferred adaptation for a task, optionally
/// restricted to part of the state space and justified by explanations.
struct FeedbackSample {
  TaskDescription task;
  AdaptationLabel adaptation = AdaptationLabel::DoNow;
  std::optional<StateConstraint> constraint;
  std::optional<std::vector<ExplanationItem>> explanation;

  bool has_explanation() const { return explanation && !explanation->empty(); }
  bool has_constraint() const { return constraint && !constraint->empty(); }
};

// Checks that explanation items reference components of this sample's task (or
// valid state variables) and that constraint bindings exist in the space.
// Throws DanglingExplanation / UnknownVariable.
void validate_feedback(const FeedbackSample& sample, const StateSpace& space);

}  // namespace taaco
