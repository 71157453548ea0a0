#include "taaco/embedding.hpp"

#include <cmath>
#include <fstream>

#include "taaco/rng.hpp"
#include "taaco/text.hpp"

namespace taaco {

namespace {

void l2_normalize(std::vector<double>& v) {
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq <= 0.0) {
    // Degenerate vector: make it a unit basis vector rather than NaN.
    if (!v.empty()) v[0] = 1.0;
    return;
  }
  double inv = 1.0 / std::sqrt(norm_sq);
  for (double& x : v) x *= inv;
}

}  // namespace

std::vector<double> fallback_embed(const std::string& text, uint64_t seed, int dim) {
  if (dim <= 0) raise(ErrorCode::InvalidArgument, "embedding dimension must be positive");
  Rng rng(mix_seed({seed, fnv1a64(match_key(text))}));
  std::vector<double> v(static_cast<size_t>(dim));
  for (double& x : v) x = rng.normal();
  l2_normalize(v);
  return v;
}

std::string HashEmbedder::id() const {
  return "hash/seed=" + std::to_string(seed_) + "/dim=" + std::to_string(dim_);
}

std::vector<double> HashEmbedder::embed(const std::string& text) const {
  return fallback_embed(text, seed_, dim_);
}

TableEmbedder TableEmbedder::load(const std::string& path, std::optional<uint64_t> fallback_seed) {
  std::ifstream in(path);
  if (!in.is_open()) raise(ErrorCode::IoError, "cannot open embedding table " + path);
  TableEmbedder table;
  table.fallback_seed_ = fallback_seed;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      raise(ErrorCode::ParseError,
            path + " line " + std::to_string(line_no) + ": expected '<text>\\t<floats>'");
    }
    std::string key = match_key(line.substr(0, tab));
    std::vector<double> values;
    for (const std::string& field : split(line.substr(tab + 1), ',')) {
      try {
        values.push_back(std::stod(field));
      } catch (const std::exception&) {
        raise(ErrorCode::ParseError,
              path + " line " + std::to_string(line_no) + ": bad float '" + field + "'");
      }
    }
    if (values.empty()) {
      raise(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": empty vector");
    }
    if (table.dim_ == 0) {
      table.dim_ = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != table.dim_) {
      raise(ErrorCode::DimensionMismatch,
            path + " line " + std::to_string(line_no) + ": got " +
                std::to_string(values.size()) + " dims, table has " + std::to_string(table.dim_));
    }
    l2_normalize(values);
    table.table_[key] = std::move(values);
  }
  if (table.dim_ == 0) table.dim_ = kDefaultEmbeddingDim;  // empty table is valid
  // Identify the table by content so checkpoints can detect provider changes.
  uint64_t digest = 1469598103934665603ULL;
  for (const auto& [key, vec] : table.table_) digest ^= fnv1a64(key);
  table.source_ = "table/dim=" + std::to_string(table.dim_) + "/n=" +
                  std::to_string(table.table_.size()) + "/digest=" + std::to_string(digest);
  return table;
}

std::string TableEmbedder::id() const { return source_; }

std::vector<double> TableEmbedder::embed(const std::string& text) const {
  auto it = table_.find(match_key(text));
  if (it != table_.end()) return it->second;
  if (fallback_seed_) return fallback_embed(text, *fallback_seed_, dim_);
  raise(ErrorCode::MissingEmbedding, "no embedding for '" + text + "'");
}

std::shared_ptr<const EmbeddingProvider> make_embedder_from_id(
    const std::string& id, const std::optional<std::string>& table_path) {
  if (id.rfind("hash/", 0) == 0) {
    uint64_t seed = 0;
    int dim = kDefaultEmbeddingDim;
    for (const std::string& part : split(id.substr(5), '/')) {
      if (part.rfind("seed=", 0) == 0) seed = std::stoull(part.substr(5));
      if (part.rfind("dim=", 0) == 0) dim = std::stoi(part.substr(4));
    }
    return std::make_shared<HashEmbedder>(seed, dim);
  }
  if (id.rfind("table/", 0) == 0) {
    if (!table_path) {
      raise(ErrorCode::ProviderMismatch,
            "checkpoint was built with a table embedder; pass the table file");
    }
    auto table = std::make_shared<TableEmbedder>(TableEmbedder::load(*table_path));
    if (table->id() != id) {
      raise(ErrorCode::ProviderMismatch, "embedding table does not match checkpoint (expected '" +
                                             id + "', loaded '" + table->id() + "')");
    }
    return table;
  }
  raise(ErrorCode::ProviderMismatch, "unknown embedding provider id '" + id + "'");
}

}  // namespace taaco
