#include "taaco/synthetic.hpp"

#include <algorithm>
#include <cstdio>

#include "taaco/rng.hpp"
#include "taaco/text.hpp"

namespace taaco {

namespace {

size_t slot(ComponentType type) { return static_cast<size_t>(type); }

int find_in(const std::vector<std::string>& list, const std::string& text) {
  std::string key = match_key(text);
  for (size_t i = 0; i < list.size(); ++i) {
    if (match_key(list[i]) == key) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (task_count <= 0) raise(ErrorCode::InvalidArgument, "task_count must be positive");
  if (min_objects < 0 || max_objects < min_objects) {
    raise(ErrorCode::InvalidArgument, "bad object count range");
  }
  for (int t = 0; t < kNumConceptTypes; ++t) {
    size_t expected = pools[static_cast<size_t>(t)].size() * concepts[static_cast<size_t>(t)].size();
    if (truth[static_cast<size_t>(t)].size() != expected) {
      raise(ErrorCode::InvalidArgument, "truth table size mismatch for type " +
                                            std::string(component_type_name(
                                                static_cast<ComponentType>(t))));
    }
  }
  if (pools[slot(ComponentType::Action)].size() < static_cast<size_t>(task_count)) {
    raise(ErrorCode::InvalidArgument, "action pool smaller than task_count (actions are unique)");
  }
  if (rules.empty() || !rules.back().concepts.empty() || rules.back().state_condition) {
    raise(ErrorCode::InvalidArgument, "rule list must end with an unconditional default");
  }
  StateSpace space{state_variables};
  space.validate();
  int conditioned = 0;
  for (const SynthRule& rule : rules) {
    for (const auto& [type, concept_text] : rule.concepts) {
      if (find_in(concepts[slot(type)], concept_text) < 0) {
        raise(ErrorCode::InvalidArgument, "rule references unknown concept '" + concept_text + "'");
      }
    }
    if (rule.state_condition) {
      ++conditioned;
      if (!space.index_of(rule.state_condition->first)) {
        raise(ErrorCode::InvalidArgument,
              "rule references unknown state variable '" + rule.state_condition->first + "'");
      }
    }
  }
  if (conditioned > 3) {
    raise(ErrorCode::InvalidArgument, "at most 3 state-conditioned rules are supported");
  }
}

bool SyntheticSpec::truth_of(ComponentType type, const std::string& component,
                             const std::string& concept_text) const {
  int ci = find_in(pools[slot(type)], component);
  int ki = find_in(concepts[slot(type)], concept_text);
  if (ci < 0 || ki < 0) return false;
  size_t width = concepts[slot(type)].size();
  return truth[slot(type)][static_cast<size_t>(ci) * width + static_cast<size_t>(ki)] != 0;
}

namespace {

bool rule_concepts_match(const SyntheticSpec& spec, const SynthRule& rule,
                         const TaskDescription& task) {
  for (const auto& [type, concept_text] : rule.concepts) {
    bool any = false;
    for (const auto& [ctype, component] : task.components()) {
      if (ctype == type && spec.truth_of(type, component, concept_text)) {
        any = true;
        break;
      }
    }
    if (!any) return false;
  }
  return true;
}

// First-match rule resolution with state conditions answered from a partial
// assignment (every consulted variable must be present).
int resolve_rule(const SyntheticSpec& spec, const TaskDescription& task,
                 const std::map<std::string, bool>& assignment) {
  for (size_t r = 0; r < spec.rules.size(); ++r) {
    const SynthRule& rule = spec.rules[r];
    if (!rule_concepts_match(spec, rule, task)) continue;
    if (rule.state_condition) {
      auto it = assignment.find(rule.state_condition->first);
      if (it == assignment.end()) continue;  // variable not relevant for this task
      if (it->second != rule.state_condition->second) continue;
    }
    return static_cast<int>(r);
  }
  return static_cast<int>(spec.rules.size()) - 1;
}

}  // namespace

AdaptationLabel synthetic_label(const SyntheticSpec& spec, const TaskDescription& task,
                                const StateSpace& space, const StateVector& state) {
  std::map<std::string, bool> assignment;
  for (size_t i = 0; i < space.size(); ++i) assignment[space.variables[i]] = state.values[i];
  return spec.rules[static_cast<size_t>(resolve_rule(spec, task, assignment))].label;
}

SyntheticResult generate_synthetic_persona(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  SyntheticResult result;
  result.dataset.persona_id = spec.persona_id;
  result.dataset.state_space.variables = spec.state_variables;
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    for (const std::string& text : spec.concepts[static_cast<size_t>(t)]) {
      result.dataset.vocabulary.add(type, text, false);
    }
  }

  // Oracle cache straight from the truth table.
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    const auto& pool = spec.pools[static_cast<size_t>(t)];
    const auto& cs = spec.concepts[static_cast<size_t>(t)];
    for (size_t c = 0; c < pool.size(); ++c) {
      for (size_t k = 0; k < cs.size(); ++k) {
        int raw = spec.truth[static_cast<size_t>(t)][c * cs.size() + k] ? 10 : 1;
        result.oracle_cache.put({spec.scorer_id, type, pool[c], cs[k], raw});
      }
    }
  }

  // Unique actions via a seeded shuffle.
  std::vector<std::string> actions = spec.pools[slot(ComponentType::Action)];
  rng.shuffle(actions);
  const auto& activities = spec.pools[slot(ComponentType::Activity)];
  const auto& objects = spec.pools[slot(ComponentType::Object)];
  const auto& locations = spec.pools[slot(ComponentType::Location)];

  for (int i = 0; i < spec.task_count; ++i) {
    PersonaTask persona_task;
    TaskDescription& task = persona_task.task;
    char id[32];
    std::snprintf(id, sizeof(id), "task_%03d", i);
    task.id = id;
    task.action = actions[static_cast<size_t>(i)];
    task.activity = activities[rng.uniform_int(activities.size())];
    int n_obj = spec.min_objects +
                static_cast<int>(rng.uniform_int(
                    static_cast<uint64_t>(spec.max_objects - spec.min_objects + 1)));
    std::vector<size_t> obj_idx(objects.size());
    for (size_t o = 0; o < obj_idx.size(); ++o) obj_idx[o] = o;
    rng.shuffle(obj_idx);
    for (int o = 0; o < n_obj; ++o) task.objects.push_back(objects[obj_idx[static_cast<size_t>(o)]]);
    task.locations.push_back(locations[rng.uniform_int(locations.size())]);
    task = validate_task(task);

    // State variables that can change which rule fires for this task.
    std::vector<std::string> relevant;
    for (const SynthRule& rule : spec.rules) {
      if (!rule_concepts_match(spec, rule, task)) continue;
      if (rule.state_condition) {
        if (std::find(relevant.begin(), relevant.end(), rule.state_condition->first) ==
            relevant.end()) {
          relevant.push_back(rule.state_condition->first);
        }
      } else {
        break;  // an unconditional match shadows everything below
      }
    }

    size_t combos = size_t{1} << relevant.size();
    std::vector<std::map<std::string, bool>> assignments(combos);
    std::vector<int> fired(combos);
    for (size_t bits = 0; bits < combos; ++bits) {
      for (size_t v = 0; v < relevant.size(); ++v) {
        assignments[bits][relevant[v]] = ((bits >> v) & 1) != 0;
      }
      fired[bits] = resolve_rule(spec, task, assignments[bits]);
    }

    // Variables whose value never changes the label are dropped from the
    // emitted constraints.
    std::vector<bool> influential(relevant.size(), false);
    for (size_t v = 0; v < relevant.size(); ++v) {
      for (size_t bits = 0; bits < combos; ++bits) {
        size_t flipped = bits ^ (size_t{1} << v);
        if (spec.rules[static_cast<size_t>(fired[bits])].label !=
            spec.rules[static_cast<size_t>(fired[flipped])].label) {
          influential[v] = true;
          break;
        }
      }
    }

    std::vector<size_t> group_reps;  // first assignment of each reduced group
    std::vector<size_t> seen_keys;
    for (size_t bits = 0; bits < combos; ++bits) {
      size_t key = 0;
      for (size_t v = 0; v < relevant.size(); ++v) {
        if (influential[v]) key |= ((bits >> v) & 1) << v;
      }
      if (std::find(seen_keys.begin(), seen_keys.end(), key) == seen_keys.end()) {
        seen_keys.push_back(key);
        group_reps.push_back(bits);
      }
    }

    for (size_t rep : group_reps) {
      FeedbackSample sample;
      sample.task = task;
      int rule_index = fired[rep];
      sample.adaptation = spec.rules[static_cast<size_t>(rule_index)].label;

      std::map<std::string, bool> constraint;
      for (size_t v = 0; v < relevant.size(); ++v) {
        if (influential[v]) constraint[relevant[v]] = ((rep >> v) & 1) != 0;
      }
      if (!constraint.empty()) {
        StateConstraint sc;
        sc.bindings = constraint;
        sample.constraint = std::move(sc);
      }

      if (rng.coin(spec.explanation_fraction)) {
        std::vector<ExplanationItem> items;
        const SynthRule& rule = spec.rules[static_cast<size_t>(rule_index)];
        for (const auto& [type, concept_text] : rule.concepts) {
          for (const auto& [ctype, component] : task.components()) {
            if (ctype == type && spec.truth_of(type, component, concept_text)) {
              items.push_back(ExplanationItem::for_component(component, type, concept_text));
              break;
            }
          }
        }
        for (const auto& [name, value] : constraint) {
          (void)value;
          items.push_back(ExplanationItem::for_state(name));
        }
        if (!items.empty()) sample.explanation = std::move(items);
      }

      result.trace.push_back({task.id, static_cast<int>(persona_task.feedback.size()), rule_index,
                              constraint});
      persona_task.feedback.push_back(std::move(sample));
    }
    result.dataset.tasks.push_back(std::move(persona_task));
  }

  result.dataset.validate();
  return result;
}

SyntheticSpec make_synthetic_spec(int persona_index, uint64_t seed, int task_count,
                                  double explanation_fraction) {
  SyntheticSpec spec;
  spec.seed = mix_seed({seed, static_cast<uint64_t>(persona_index), 0xA11CE});
  spec.persona_id = "synthetic-p" + std::to_string(persona_index);
  spec.task_count = task_count;
  spec.explanation_fraction = explanation_fraction;
  spec.state_variables = {"weekend",          "user is asleep", "user is close by",
                          "guests are present", "user is in a rush", "adverse weather",
                          "daytime",          "house is tidy"};

  char buf[64];
  auto fill = [&buf](std::vector<std::string>& out, const char* pattern, int count) {
    for (int i = 0; i < count; ++i) {
      std::snprintf(buf, sizeof(buf), pattern, i);
      out.push_back(buf);
    }
  };
  fill(spec.pools[slot(ComponentType::Action)], "household chore %02d", task_count);
  fill(spec.pools[slot(ComponentType::Activity)], "activity group %02d", 12);
  fill(spec.pools[slot(ComponentType::Object)], "item %02d", 30);
  fill(spec.pools[slot(ComponentType::Location)], "room %d", 8);

  fill(spec.concepts[slot(ComponentType::Action)], "action concept %d", 7);
  fill(spec.concepts[slot(ComponentType::Activity)], "activity concept %d", 6);
  fill(spec.concepts[slot(ComponentType::Object)], "object concept %d", 7);
  fill(spec.concepts[slot(ComponentType::Location)], "location concept %d", 5);

  Rng rng(spec.seed);

  // Concepts the rules hinge on, distinct per type.
  int obj_a = static_cast<int>(rng.uniform_int(7));
  int act_a = static_cast<int>(rng.uniform_int(7));
  int act_b = (act_a + 1 + static_cast<int>(rng.uniform_int(6))) % 7;
  int acty_a = static_cast<int>(rng.uniform_int(6));
  int acty_b = (acty_a + 1 + static_cast<int>(rng.uniform_int(5))) % 6;

  // Truth table: rule concepts fire at a noticeably higher base rate so every
  // rule matters.
  for (int t = 0; t < kNumConceptTypes; ++t) {
    const auto& pool = spec.pools[static_cast<size_t>(t)];
    const auto& cs = spec.concepts[static_cast<size_t>(t)];
    std::vector<double> p(cs.size());
    for (double& x : p) x = rng.uniform(0.08, 0.18);
    if (t == static_cast<int>(ComponentType::Object)) p[static_cast<size_t>(obj_a)] = rng.uniform(0.16, 0.24);
    if (t == static_cast<int>(ComponentType::Action)) {
      p[static_cast<size_t>(act_a)] = rng.uniform(0.2, 0.3);
      p[static_cast<size_t>(act_b)] = rng.uniform(0.2, 0.3);
    }
    if (t == static_cast<int>(ComponentType::Activity)) {
      p[static_cast<size_t>(acty_a)] = rng.uniform(0.2, 0.3);
      p[static_cast<size_t>(acty_b)] = rng.uniform(0.2, 0.3);
    }
    auto& table = spec.truth[static_cast<size_t>(t)];
    table.resize(pool.size() * cs.size());
    for (size_t c = 0; c < pool.size(); ++c) {
      for (size_t k = 0; k < cs.size(); ++k) {
        table[c * cs.size() + k] = rng.coin(p[k]) ? 1 : 0;
      }
    }
  }

  const auto& act_cs = spec.concepts[slot(ComponentType::Action)];
  const auto& acty_cs = spec.concepts[slot(ComponentType::Activity)];
  const auto& obj_cs = spec.concepts[slot(ComponentType::Object)];

  // Personas differ in which adaptation each trigger maps to.
  std::array<AdaptationLabel, 3> wheel = {AdaptationLabel::NoAction, AdaptationLabel::Remind,
                                          AdaptationLabel::DoLater};
  auto pick = [&wheel](int i) { return wheel[static_cast<size_t>(i % 3)]; };

  SynthRule r0;
  r0.concepts = {{ComponentType::Object, obj_cs[static_cast<size_t>(obj_a)]}};
  r0.label = pick(persona_index);
  SynthRule r1;
  r1.concepts = {{ComponentType::Action, act_cs[static_cast<size_t>(act_a)]}};
  r1.state_condition = std::make_pair(std::string("user is asleep"), true);
  r1.label = AdaptationLabel::DoLater;
  SynthRule r2;
  r2.concepts = {{ComponentType::Activity, acty_cs[static_cast<size_t>(acty_a)]}};
  r2.label = pick(persona_index + 1);
  SynthRule r3;
  r3.concepts = {{ComponentType::Action, act_cs[static_cast<size_t>(act_b)]}};
  r3.label = pick(persona_index + 2);
  SynthRule r4;
  r4.concepts = {{ComponentType::Activity, acty_cs[static_cast<size_t>(acty_b)]}};
  r4.state_condition = std::make_pair(std::string("weekend"), persona_index % 2 == 0);
  r4.label = AdaptationLabel::Remind;
  SynthRule fallback;
  fallback.label = AdaptationLabel::DoNow;

  spec.rules = {r0, r1, r2, r3, r4, fallback};
  return spec;
}

ScoreCache corrupt_cache(const ScoreCache& cache, double flip_prob, uint64_t seed,
                         const std::string& new_scorer_id) {
  Rng rng(seed);
  ScoreCache out;
  for (ScoreCacheEntry entry : cache.entries()) {
    if (rng.coin(flip_prob)) entry.raw_score = entry.raw_score >= 6 ? 1 : 10;
    entry.scorer_id = new_scorer_id;
    out.put(entry);
  }
  return out;
}

}  // namespace taaco
