#pragma once

#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "taaco/domain.hpp"

namespace taaco {

struct ScoreCacheEntry {
  std::string scorer_id;
  ComponentType component_type = ComponentType::Action;
  std::string component_text;  // normalized
  std::string concept_text;    // normalized
  int raw_score = 1;           // 1..10
};

/// Persistent cache of raw concept-match scores. Keyed by
/// (scorer_id, type, component, concept); append-only. The backing file is
/// newline-delimited JSON, one entry per line.
class ScoreCache {
 public:
  ScoreCache() = default;
  ScoreCache(ScoreCache&& other) noexcept;
  ScoreCache& operator=(ScoreCache&& other) noexcept;
  ScoreCache(const ScoreCache&) = delete;
  ScoreCache& operator=(const ScoreCache&) = delete;

  // Loads an existing cache file; a missing file yields an empty cache bound
  // to that path.
  static ScoreCache open(const std::string& path);

  // In-memory copy of all entries (no file binding).
  ScoreCache detached_copy() const;

  std::optional<int> lookup(const std::string& scorer_id, ComponentType type,
                            const std::string& component, const std::string& concept_text) const;

  // Inserts and, when file-bound, appends one line. Duplicate keys keep the
  // first value.
  void put(const ScoreCacheEntry& entry);

  size_t size() const;

  std::vector<ScoreCacheEntry> entries() const;  // insertion order

  // Writes every entry to a fresh file and binds the cache to it.
  void save_as(const std::string& path);

  const std::string& path() const { return path_; }

 private:
  static std::string key_of(const std::string& scorer_id, ComponentType type,
                            const std::string& component, const std::string& concept_text);
  void append_line_locked(const ScoreCacheEntry& entry);

  mutable std::mutex mu_;
  std::string path_;
  std::unordered_map<std::string, int> by_key_;
  std::vector<ScoreCacheEntry> order_;
};

}  // namespace taaco
