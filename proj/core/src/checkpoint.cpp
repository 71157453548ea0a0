#include "taaco/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

namespace taaco {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

json config_to_json(const ModelConfig& config) {
  return json{{"model_dim", config.encoder.model_dim},
              {"layers", config.encoder.layers},
              {"heads", config.encoder.heads},
              {"ffn_dim", config.encoder.ffn_dim},
              {"seed", config.encoder.seed},
              {"lm_dim", config.lm_dim},
              {"variant", config.variant == ModelConfig::Variant::Full ? "full" : "no_concepts"}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig config;
  config.encoder.model_dim = j.at("model_dim").get<int>();
  config.encoder.layers = j.at("layers").get<int>();
  config.encoder.heads = j.at("heads").get<int>();
  config.encoder.ffn_dim = j.at("ffn_dim").get<int>();
  config.encoder.seed = j.at("seed").get<uint64_t>();
  config.lm_dim = j.at("lm_dim").get<int>();
  std::string variant = j.at("variant").get<std::string>();
  config.variant =
      variant == "no_concepts" ? ModelConfig::Variant::NoConcepts : ModelConfig::Variant::Full;
  return config;
}

json vocabulary_to_json(const ConceptVocabulary& vocab) {
  json out = json::object();
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    json list = json::array();
    for (const Concept& c : vocab.of_type(type)) {
      list.push_back(json{{"text", c.text}, {"user_added", c.user_added}});
    }
    out[component_type_name(type)] = std::move(list);
  }
  return out;
}

ConceptVocabulary vocabulary_from_json(const json& j) {
  ConceptVocabulary vocab;
  for (int t = 0; t < kNumConceptTypes; ++t) {
    auto type = static_cast<ComponentType>(t);
    auto it = j.find(component_type_name(type));
    if (it == j.end()) continue;
    for (const auto& entry : *it) {
      vocab.add(type, entry.at("text").get<std::string>(),
                entry.value("user_added", false));
    }
  }
  return vocab;
}

}  // namespace

void save_checkpoint(TaacoModel& model, const std::string& path) {
  auto params = model.parameters();

  json manifest = json::array();
  uint64_t offset = 0;
  for (const Parameter* p : params) {
    manifest.push_back(json{{"name", p->name}, {"shape", p->value.shape()}, {"offset", offset}});
    offset += static_cast<uint64_t>(p->value.size()) * sizeof(double);
  }

  json header{{"config", config_to_json(model.config())},
              {"state_variables", model.state_space().variables},
              {"vocabulary", vocabulary_to_json(model.vocabulary())},
              {"embedder_id", model.embedder_id()},
              {"manifest", manifest}};
  std::string header_bytes = header.dump();

  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.is_open()) raise(ErrorCode::IoError, "cannot write checkpoint " + tmp);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    char version = static_cast<char>(kCheckpointVersion);
    out.write(&version, 1);
    uint64_t len = header_bytes.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header_bytes.data(), static_cast<std::streamsize>(header_bytes.size()));
    for (const Parameter* p : params) {
      out.write(reinterpret_cast<const char*>(p->value.data()),
                static_cast<std::streamsize>(p->value.size() * sizeof(double)));
    }
    if (!out.good()) raise(ErrorCode::IoError, "short write to " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    raise(ErrorCode::IoError, "cannot move checkpoint into place at " + path);
  }
}

TaacoModel load_checkpoint(const std::string& path,
                           std::shared_ptr<const EmbeddingProvider> embedder,
                           const std::optional<std::string>& table_path) {
  std::ifstream in(path, std::ios::binary);
  if (!in.is_open()) raise(ErrorCode::IoError, "cannot open checkpoint " + path);

  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    raise(ErrorCode::BadMagic, path + " is not a checkpoint file");
  }
  char version = 0;
  if (!in.read(&version, 1)) raise(ErrorCode::TruncatedFile, "missing version byte");
  if (static_cast<unsigned char>(version) != kCheckpointVersion) {
    raise(ErrorCode::VersionUnsupported,
          "checkpoint version " + std::to_string(static_cast<int>(version)));
  }
  uint64_t header_len = 0;
  if (!in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len))) {
    raise(ErrorCode::TruncatedFile, "missing header length");
  }
  std::string header_bytes(header_len, '\0');
  if (!in.read(header_bytes.data(), static_cast<std::streamsize>(header_len))) {
    raise(ErrorCode::TruncatedFile, "header shorter than declared");
  }

  json header;
  try {
    header = json::parse(header_bytes);
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("checkpoint header: ") + e.what());
  }

  ModelConfig config;
  StateSpace space;
  ConceptVocabulary vocab;
  std::string embedder_id;
  try {
    config = config_from_json(header.at("config"));
    space.variables = header.at("state_variables").get<std::vector<std::string>>();
    vocab = vocabulary_from_json(header.at("vocabulary"));
    embedder_id = header.at("embedder_id").get<std::string>();
  } catch (const json::exception& e) {
    raise(ErrorCode::SchemaError, std::string("checkpoint header: ") + e.what());
  }

  if (!embedder) {
    embedder = make_embedder_from_id(embedder_id, table_path);
  } else if (embedder->id() != embedder_id) {
    raise(ErrorCode::ProviderMismatch, "checkpoint was built with embedder '" + embedder_id +
                                           "', got '" + embedder->id() + "'");
  }

  TaacoModel model(config, std::move(space), std::move(vocab), std::move(embedder));
  auto params = model.parameters();

  const json& manifest = header.at("manifest");
  if (manifest.size() != params.size()) {
    raise(ErrorCode::ManifestMismatch,
          "manifest lists " + std::to_string(manifest.size()) + " tensors, model has " +
              std::to_string(params.size()));
  }
  for (size_t i = 0; i < params.size(); ++i) {
    const json& entry = manifest.at(i);
    if (entry.at("name").get<std::string>() != params[i]->name) {
      raise(ErrorCode::ManifestMismatch, "tensor " + std::to_string(i) + " is '" +
                                             entry.at("name").get<std::string>() + "', expected '" +
                                             params[i]->name + "'");
    }
    auto shape = entry.at("shape").get<std::vector<int64_t>>();
    if (shape != params[i]->value.shape()) {
      raise(ErrorCode::ManifestMismatch, "tensor '" + params[i]->name + "' shape mismatch");
    }
    if (!in.read(reinterpret_cast<char*>(params[i]->value.data()),
                 static_cast<std::streamsize>(params[i]->value.size() * sizeof(double)))) {
      raise(ErrorCode::TruncatedFile, "data for tensor '" + params[i]->name + "' is incomplete");
    }
    if (!params[i]->value.all_finite()) {
      raise(ErrorCode::ParseError, "tensor '" + params[i]->name + "' contains non-finite values");
    }
  }
  return model;
}

}  // namespace taaco
