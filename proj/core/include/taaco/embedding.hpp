#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "taaco/errors.hpp"

namespace taaco {

inline constexpr int kDefaultEmbeddingDim = 768;

/// Source of fixed language embeddings for concept phrases. Outputs are
/// deterministic per (provider, normalized text) and unit L2 norm.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual int dimension() const = 0;
  virtual std::vector<double> embed(const std::string& text) const = 0;
};

// Seeded pseudorandom unit vector for the normalized text. Distinct texts give
// distinct vectors with overwhelming probability.
std::vector<double> fallback_embed(const std::string& text, uint64_t seed, int dim);

/// Deterministic hash-seeded provider. No semantics; useful for tests and for
/// running without a precomputed embedding table.
class HashEmbedder : public EmbeddingProvider {
 public:
  explicit HashEmbedder(uint64_t seed, int dim = kDefaultEmbeddingDim)
      : seed_(seed), dim_(dim) {}

  std::string id() const override;
  int dimension() const override { return dim_; }
  std::vector<double> embed(const std::string& text) const override;

 private:
  uint64_t seed_;
  int dim_;
};

/// Provider backed by a precomputed table file (one record per line:
/// normalized text, tab, comma-separated floats). Vectors are renormalized on
/// load. Lookups miss with MissingEmbedding unless a fallback seed is given.
class TableEmbedder : public EmbeddingProvider {
 public:
  static TableEmbedder load(const std::string& path,
                            std::optional<uint64_t> fallback_seed = std::nullopt);

  std::string id() const override;
  int dimension() const override { return dim_; }
  std::vector<double> embed(const std::string& text) const override;

  size_t size() const { return table_.size(); }

 private:
  std::string source_;
  int dim_ = 0;
  std::unordered_map<std::string, std::vector<double>> table_;
  std::optional<uint64_t> fallback_seed_;
};

// Rebuilds a provider from its id string ("hash/seed=7/dim=768"); table-backed
// ids additionally need the table path.
std::shared_ptr<const EmbeddingProvider> make_embedder_from_id(
    const std::string& id, const std::optional<std::string>& table_path = std::nullopt);

}  // namespace taaco
