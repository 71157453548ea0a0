#include "taaco/score_cache.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "taaco/text.hpp"

namespace taaco {

using nlohmann::json;

ScoreCache::ScoreCache(ScoreCache&& other) noexcept {
  std::lock_guard<std::mutex> lock(other.mu_);
  path_ = std::move(other.path_);
  by_key_ = std::move(other.by_key_);
  order_ = std::move(other.order_);
}

ScoreCache& ScoreCache::operator=(ScoreCache&& other) noexcept {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  path_ = std::move(other.path_);
  by_key_ = std::move(other.by_key_);
  order_ = std::move(other.order_);
  return *this;
}

std::string ScoreCache::key_of(const std::string& scorer_id, ComponentType type,
                               const std::string& component, const std::string& concept_text) {
  std::string key = scorer_id;
  key += '\x1f';
  key += component_type_name(type);
  key += '\x1f';
  key += match_key(component);
  key += '\x1f';
  key += match_key(concept_text);
  return key;
}

ScoreCache ScoreCache::open(const std::string& path) {
  ScoreCache cache;
  cache.path_ = path;
  std::ifstream in(path);
  if (!in.is_open()) return cache;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorCode::ParseError,
            "score cache " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    ScoreCacheEntry entry;
    try {
      entry.scorer_id = j.at("scorer_id").get<std::string>();
      entry.component_type = parse_component_type(j.at("component_type").get<std::string>());
      entry.component_text = j.at("component_text").get<std::string>();
      entry.concept_text = j.at("concept_text").get<std::string>();
      entry.raw_score = j.at("raw_score").get<int>();
    } catch (const json::exception& e) {
      raise(ErrorCode::SchemaError,
            "score cache " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
    std::string key = key_of(entry.scorer_id, entry.component_type, entry.component_text,
                             entry.concept_text);
    if (cache.by_key_.emplace(key, entry.raw_score).second) {
      cache.order_.push_back(std::move(entry));
    }
  }
  return cache;
}

ScoreCache ScoreCache::detached_copy() const {
  std::lock_guard<std::mutex> lock(mu_);
  ScoreCache out;
  out.by_key_ = by_key_;
  out.order_ = order_;
  return out;
}

std::optional<int> ScoreCache::lookup(const std::string& scorer_id, ComponentType type,
                                      const std::string& component,
                                      const std::string& concept_text) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_key_.find(key_of(scorer_id, type, component, concept_text));
  if (it == by_key_.end()) return std::nullopt;
  return it->second;
}

void ScoreCache::append_line_locked(const ScoreCacheEntry& entry) {
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out.is_open()) raise(ErrorCode::IoError, "cannot append to score cache " + path_);
  json j{{"scorer_id", entry.scorer_id},
         {"component_type", component_type_name(entry.component_type)},
         {"component_text", entry.component_text},
         {"concept_text", entry.concept_text},
         {"raw_score", entry.raw_score}};
  out << j.dump() << '\n';
}

void ScoreCache::put(const ScoreCacheEntry& raw_entry) {
  ScoreCacheEntry entry = raw_entry;
  entry.component_text = match_key(entry.component_text);
  entry.concept_text = match_key(entry.concept_text);
  std::lock_guard<std::mutex> lock(mu_);
  std::string key =
      key_of(entry.scorer_id, entry.component_type, entry.component_text, entry.concept_text);
  if (!by_key_.emplace(key, entry.raw_score).second) return;
  order_.push_back(entry);
  append_line_locked(entry);
}

size_t ScoreCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return order_.size();
}

std::vector<ScoreCacheEntry> ScoreCache::entries() const {
  std::lock_guard<std::mutex> lock(mu_);
  return order_;
}

void ScoreCache::save_as(const std::string& path) {
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) raise(ErrorCode::IoError, "cannot write score cache " + path);
  for (const auto& entry : order_) {
    json j{{"scorer_id", entry.scorer_id},
           {"component_type", component_type_name(entry.component_type)},
           {"component_text", entry.component_text},
           {"concept_text", entry.concept_text},
           {"raw_score", entry.raw_score}};
    out << j.dump() << '\n';
  }
  path_ = path;
}

}  // namespace taaco
