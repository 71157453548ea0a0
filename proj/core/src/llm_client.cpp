#include "taaco/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <semaphore>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace taaco {

using nlohmann::json;

// ---------------------------------------------------------------------------
// LiveClient
// ---------------------------------------------------------------------------

struct LiveClient::Impl {
  std::string scheme_host_port;
  std::string path;
  std::counting_semaphore<256> slots;

  explicit Impl(int max_concurrent) : slots(std::max(1, max_concurrent)) {}
};

namespace {

// Splits "http://host:port/path" into base and path.
void split_endpoint(const std::string& endpoint, std::string& base, std::string& path) {
  auto scheme_end = endpoint.find("://");
  size_t path_start =
      endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) {
    base = endpoint;
    path = "/";
  } else {
    base = endpoint.substr(0, path_start);
    path = endpoint.substr(path_start);
  }
}

}  // namespace

LiveClient::LiveClient(LiveClientConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_.max_concurrent)) {
  if (config_.endpoint.empty()) {
    raise(ErrorCode::InvalidArgument, "live client requires an endpoint URL");
  }
  split_endpoint(config_.endpoint, impl_->scheme_host_port, impl_->path);
}

LiveClient::~LiveClient() = default;

std::string LiveClient::do_complete(const std::string& prompt) {
  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<256>* s;
    ~Release() { s->release(); }
  } release{&impl_->slots};

  httplib::Client http(impl_->scheme_host_port);
  http.set_connection_timeout(std::chrono::duration<double>(config_.timeout_seconds));
  http.set_read_timeout(std::chrono::duration<double>(config_.timeout_seconds));

  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  json body{{"model", config_.model},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})},
            {"temperature", 0}};

  auto res = http.Post(impl_->path, headers, body.dump(), "application/json");
  if (!res) {
    raise(ErrorCode::TransportError,
          "POST " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    raise(ErrorCode::TransportError,
          "POST " + config_.endpoint + " returned status " + std::to_string(res->status));
  }
  try {
    json reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    raise(ErrorCode::TransportError, std::string("malformed completion response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Offline clients
// ---------------------------------------------------------------------------

std::string ReplayClient::do_complete(const std::string&) {
  raise(ErrorCode::ReplayMiss,
        "replay client '" + scorer_id_ + "' has no transport; score is missing from the cache");
}

std::string ScriptedClient::do_complete(const std::string& prompt) {
  if (fn_) return fn_(prompt);
  if (next_ >= responses_.size()) {
    raise(ErrorCode::TransportError, "scripted client exhausted after " +
                                         std::to_string(responses_.size()) + " responses");
  }
  return responses_[next_++];
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

TranscriptCache TranscriptCache::open(const std::string& path) {
  TranscriptCache t;
  t.path_ = path;
  std::ifstream in(path);
  if (!in.is_open()) return t;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      std::string prompt = j.at("prompt").get<std::string>();
      std::string response = j.at("response").get<std::string>();
      if (t.by_prompt_.emplace(prompt, response).second) t.order_.push_back(prompt);
    } catch (const json::exception& e) {
      raise(ErrorCode::ParseError,
            "transcript " + path + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return t;
}

std::optional<std::string> TranscriptCache::lookup(const std::string& prompt) const {
  auto it = by_prompt_.find(prompt);
  if (it == by_prompt_.end()) return std::nullopt;
  return it->second;
}

void TranscriptCache::put(const std::string& prompt, const std::string& response) {
  if (!by_prompt_.emplace(prompt, response).second) return;
  order_.push_back(prompt);
  if (path_.empty()) return;
  std::ofstream out(path_, std::ios::app);
  if (!out.is_open()) raise(ErrorCode::IoError, "cannot append to transcript " + path_);
  out << json{{"prompt", prompt}, {"response", response}}.dump() << '\n';
}

void TranscriptCache::save_as(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out.is_open()) raise(ErrorCode::IoError, "cannot write transcript " + path);
  for (const auto& prompt : order_) {
    out << json{{"prompt", prompt}, {"response", by_prompt_.at(prompt)}}.dump() << '\n';
  }
  path_ = path;
}

std::string TranscriptReplayClient::do_complete(const std::string& prompt) {
  auto hit = transcript_->lookup(prompt);
  if (!hit) raise(ErrorCode::ReplayMiss, "prompt not present in transcript");
  return *hit;
}

std::string RecordingClient::do_complete(const std::string& prompt) {
  std::string response = inner_->complete(prompt);
  transcript_->put(prompt, response);
  return response;
}

}  // namespace taaco
