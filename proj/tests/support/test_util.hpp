#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "taaco/domain.hpp"

namespace taaco::testing {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    auto base = std::filesystem::temp_directory_path();
    for (int i = 0; i < 10000; ++i) {
      auto candidate = base / (tag + "-" + std::to_string(i));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create temp dir");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

inline TaskDescription make_task(std::string id, std::string action, std::string activity,
                                 std::vector<std::string> objects,
                                 std::vector<std::string> locations) {
  TaskDescription t;
  t.id = std::move(id);
  t.action = std::move(action);
  t.activity = std::move(activity);
  t.objects = std::move(objects);
  t.locations = std::move(locations);
  return t;
}

}  // namespace taaco::testing
