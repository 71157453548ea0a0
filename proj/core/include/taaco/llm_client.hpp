#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taaco/errors.hpp"

namespace taaco {

/// Transport used for both the concept scorer and the few-shot baseline.
/// Implementations throw Error(TransportError) / Error(ReplayMiss).
class CompletionClient {
 public:
  virtual ~CompletionClient() = default;

  // Identity used as the cache scorer_id; distinct services never share keys.
  virtual std::string scorer_id() const = 0;

  std::string complete(const std::string& prompt) {
    ++calls_;
    return do_complete(prompt);
  }

  int calls() const { return calls_.load(); }

 private:
  virtual std::string do_complete(const std::string& prompt) = 0;

  std::atomic<int> calls_{0};
};

struct LiveClientConfig {
  std::string endpoint;  // e.g. "http://127.0.0.1:8080/v1/chat/completions"
  std::string model;
  double timeout_seconds = 30.0;
  int max_concurrent = 4;
  std::string api_key_env = "TAACO_LLM_API_KEY";
};

/// HTTP chat-completions client. Sends one user message per call with
/// temperature 0 and returns the first choice's content.
class LiveClient : public CompletionClient {
 public:
  explicit LiveClient(LiveClientConfig config);
  ~LiveClient() override;

  std::string scorer_id() const override { return config_.model; }
  const LiveClientConfig& config() const { return config_; }

 private:
  std::string do_complete(const std::string& prompt) override;

  LiveClientConfig config_;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Offline client: every completion attempt fails with ReplayMiss. Scoring
/// against a warm cache never reaches it.
class ReplayClient : public CompletionClient {
 public:
  explicit ReplayClient(std::string scorer_id) : scorer_id_(std::move(scorer_id)) {}

  std::string scorer_id() const override { return scorer_id_; }

 private:
  std::string do_complete(const std::string& prompt) override;

  std::string scorer_id_;
};

/// Test double that replays a fixed response sequence.
class ScriptedClient : public CompletionClient {
 public:
  ScriptedClient(std::string scorer_id, std::vector<std::string> responses)
      : scorer_id_(std::move(scorer_id)), responses_(std::move(responses)) {}

  explicit ScriptedClient(std::string scorer_id,
                          std::function<std::string(const std::string&)> fn)
      : scorer_id_(std::move(scorer_id)), fn_(std::move(fn)) {}

  std::string scorer_id() const override { return scorer_id_; }

 private:
  std::string do_complete(const std::string& prompt) override;

  std::string scorer_id_;
  std::vector<std::string> responses_;
  size_t next_ = 0;
  std::function<std::string(const std::string&)> fn_;
};

/// Prompt -> response transcript, persisted as newline-delimited JSON, used to
/// replay few-shot baseline runs.
class TranscriptCache {
 public:
  TranscriptCache() = default;
  static TranscriptCache open(const std::string& path);

  std::optional<std::string> lookup(const std::string& prompt) const;
  void put(const std::string& prompt, const std::string& response);
  size_t size() const { return order_.size(); }
  void save_as(const std::string& path);

 private:
  std::string path_;
  std::map<std::string, std::string> by_prompt_;
  std::vector<std::string> order_;
};

/// Serves completions from a transcript; misses raise ReplayMiss.
class TranscriptReplayClient : public CompletionClient {
 public:
  TranscriptReplayClient(std::string scorer_id, const TranscriptCache& transcript)
      : scorer_id_(std::move(scorer_id)), transcript_(&transcript) {}

  std::string scorer_id() const override { return scorer_id_; }

 private:
  std::string do_complete(const std::string& prompt) override;

  std::string scorer_id_;
  const TranscriptCache* transcript_;
};

/// Wraps a live client and records every exchange into a transcript.
class RecordingClient : public CompletionClient {
 public:
  RecordingClient(CompletionClient& inner, TranscriptCache& transcript)
      : inner_(&inner), transcript_(&transcript) {}

  std::string scorer_id() const override { return inner_->scorer_id(); }

 private:
  std::string do_complete(const std::string& prompt) override;

  CompletionClient* inner_;
  TranscriptCache* transcript_;
};

}  // namespace taaco
