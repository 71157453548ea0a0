#pragma once

#include <memory>
#include <optional>
#include <string>

#include "taaco/model.hpp"

namespace taaco {

inline constexpr char kCheckpointMagic[5] = {'T', 'A', 'A', 'C', 'O'};
inline constexpr unsigned char kCheckpointVersion = 0x01;

// Atomically writes the model to path: magic + version byte, a
// length-prefixed JSON header (config, state space, vocabulary, embedder id,
// tensor manifest), then raw little-endian float64 data in manifest order.
void save_checkpoint(TaacoModel& model, const std::string& path);

// Loads a checkpoint. When embedder is null it is rebuilt from the stored
// provider id (table-backed ids need table_path). A provided embedder must
// match the stored id.
TaacoModel load_checkpoint(const std::string& path,
                           std::shared_ptr<const EmbeddingProvider> embedder = nullptr,
                           const std::optional<std::string>& table_path = std::nullopt);

}  // namespace taaco
