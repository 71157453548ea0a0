#include "taaco/dataio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "taaco/text.hpp"

namespace taaco {

using nlohmann::json;

size_t PersonaDataset::total_feedback() const {
  size_t n = 0;
  for (const auto& t : tasks) n += t.feedback.size();
  return n;
}

std::vector<FeedbackSample> PersonaDataset::all_feedback() const {
  std::vector<FeedbackSample> out;
  out.reserve(total_feedback());
  for (const auto& t : tasks) out.insert(out.end(), t.feedback.begin(), t.feedback.end());
  return out;
}

void PersonaDataset::validate() const {
  state_space.validate();
  for (const auto& persona_task : tasks) {
    validate_task(persona_task.task);
    for (const auto& sample : persona_task.feedback) {
      validate_feedback(sample, state_space);
      if (!sample.explanation) continue;
      for (const auto& item : *sample.explanation) {
        if (item.kind != ExplanationItem::Kind::Component) continue;
        if (!vocabulary.contains(item.component_type, item.concept_text)) {
          raise(ErrorCode::SchemaError, "persona '" + persona_id + "': concept '" +
                                            item.concept_text +
                                            "' referenced by an explanation is not in the "
                                            "vocabulary");
        }
      }
    }
  }
}

namespace {

std::string where(const std::string& origin, const std::string& detail) {
  return origin + ": " + detail;
}

ExplanationItem explanation_item_from_json(const json& j, const std::string& origin) {
  if (j.contains("state_variable")) {
    return ExplanationItem::for_state(j.at("state_variable").get<std::string>());
  }
  if (!j.contains("component") || !j.contains("component_type") || !j.contains("concept")) {
    raise(ErrorCode::SchemaError,
          where(origin, "explanation item needs component/component_type/concept or "
                        "state_variable"));
  }
  ComponentType type = parse_component_type(j.at("component_type").get<std::string>());
  if (type == ComponentType::State) {
    raise(ErrorCode::SchemaError, where(origin, "component_type cannot be 'state'"));
  }
  auto item = ExplanationItem::for_component(j.at("component").get<std::string>(), type,
                                             j.at("concept").get<std::string>());
  if (item.concept_text.empty()) {
    raise(ErrorCode::SchemaError, where(origin, "explanation concept is empty"));
  }
  return item;
}

json explanation_item_to_json(const ExplanationItem& item) {
  if (item.kind == ExplanationItem::Kind::State) {
    return json{{"state_variable", item.state_variable}};
  }
  return json{{"component", item.component},
              {"component_type", component_type_name(item.component_type)},
              {"concept", item.concept_text}};
}

}  // namespace

PersonaDataset parse_persona_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, where(origin, e.what()));
  }

  PersonaDataset dataset;
  try {
    dataset.persona_id = j.at("persona_id").get<std::string>();
    dataset.state_space.variables = j.at("state_variables").get<std::vector<std::string>>();

    const json& concepts = j.at("concepts");
    for (int t = 0; t < kNumConceptTypes; ++t) {
      auto type = static_cast<ComponentType>(t);
      auto it = concepts.find(component_type_name(type));
      if (it == concepts.end()) continue;
      for (const auto& entry : *it) {
        if (entry.is_string()) {
          dataset.vocabulary.add(type, entry.get<std::string>(), false);
        } else {
          dataset.vocabulary.add(type, entry.at("text").get<std::string>(),
                                 entry.value("user_added", false));
        }
      }
    }

    for (const json& jt : j.at("tasks")) {
      PersonaTask persona_task;
      persona_task.task.id = jt.at("id").get<std::string>();
      persona_task.task.action = jt.at("action").get<std::string>();
      persona_task.task.activity = jt.at("activity").get<std::string>();
      persona_task.task.objects = jt.value("objects", std::vector<std::string>{});
      persona_task.task.locations = jt.value("locations", std::vector<std::string>{});
      persona_task.task = validate_task(persona_task.task);

      for (const json& jf : jt.at("feedback")) {
        FeedbackSample sample;
        sample.task = persona_task.task;
        sample.adaptation = parse_adaptation_label(jf.at("adaptation").get<std::string>());
        if (jf.contains("state_constraint") && !jf.at("state_constraint").is_null()) {
          StateConstraint constraint;
          for (const auto& [name, value] : jf.at("state_constraint").items()) {
            constraint.bindings[display_normalize(name)] = value.get<bool>();
          }
          sample.constraint = std::move(constraint);
        }
        if (jf.contains("explanation") && !jf.at("explanation").is_null()) {
          std::vector<ExplanationItem> items;
          for (const json& ji : jf.at("explanation")) {
            items.push_back(explanation_item_from_json(ji, origin));
          }
          sample.explanation = std::move(items);
        }
        persona_task.feedback.push_back(std::move(sample));
      }
      dataset.tasks.push_back(std::move(persona_task));
    }
  } catch (const json::exception& e) {
    raise(ErrorCode::SchemaError, where(origin, e.what()));
  }

  dataset.validate();
  return dataset;
}

PersonaDataset load_persona(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) raise(ErrorCode::IoError, "cannot open persona file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_persona_json(buffer.str(), path);
}

std::string persona_to_json(const PersonaDataset& dataset) {
  json concepts = json::object();
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    json list = json::array();
    for (const Concept& c : dataset.vocabulary.of_type(type)) {
      if (c.user_added) {
        list.push_back(json{{"text", c.text}, {"user_added", true}});
      } else {
        list.push_back(c.text);
      }
    }
    concepts[component_type_name(type)] = std::move(list);
  }

  json tasks = json::array();
  for (const auto& persona_task : dataset.tasks) {
    json feedback = json::array();
    for (const auto& sample : persona_task.feedback) {
      json jf{{"adaptation", adaptation_label_name(sample.adaptation)}};
      if (sample.constraint && !sample.constraint->empty()) {
        json constraint = json::object();
        for (const auto& [name, value] : sample.constraint->bindings) constraint[name] = value;
        jf["state_constraint"] = std::move(constraint);
      }
      if (sample.explanation && !sample.explanation->empty()) {
        json items = json::array();
        for (const auto& item : *sample.explanation) {
          items.push_back(explanation_item_to_json(item));
        }
        jf["explanation"] = std::move(items);
      }
      feedback.push_back(std::move(jf));
    }
    tasks.push_back(json{{"id", persona_task.task.id},
                         {"action", persona_task.task.action},
                         {"activity", persona_task.task.activity},
                         {"objects", persona_task.task.objects},
                         {"locations", persona_task.task.locations},
                         {"feedback", std::move(feedback)}});
  }

  json out{{"persona_id", dataset.persona_id},
           {"state_variables", dataset.state_space.variables},
           {"concepts", std::move(concepts)},
           {"tasks", std::move(tasks)}};
  return out.dump(2);
}

void save_persona(const PersonaDataset& dataset, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out.is_open()) raise(ErrorCode::IoError, "cannot write persona file " + tmp);
    out << persona_to_json(dataset) << '\n';
    if (!out.good()) raise(ErrorCode::IoError, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    raise(ErrorCode::IoError, "cannot move persona file into place at " + path);
  }
}

ConceptVocabulary load_base_concepts(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) raise(ErrorCode::IoError, "cannot open concept file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, path + ": " + e.what());
  }
  ConceptVocabulary vocab;
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    auto it = j.find(component_type_name(type));
    if (it == j.end()) continue;
    for (const auto& entry : *it) vocab.add(type, entry.get<std::string>(), false);
  }
  return vocab;
}

}  // namespace taaco
