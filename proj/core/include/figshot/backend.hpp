#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/prompting.hpp"

namespace figshot {

struct DecodeParams {
  double temperature = 0.0;
  /// Upper bound on generated tokens; answers are short, the refusal string
  /// is the longest expected output.
  int max_tokens = 128;
};

struct Completion {
  std::string text;
  std::vector<double> token_logprobs;  // natural log, one per generated token
};

struct CompletionRequest {
  std::string instance_id;
  std::string config_id;
  PromptBundle bundle;
  DecodeParams params;
};

/// A multimodal chat model. complete() may be called from several threads at
/// once. Transient failures raise RetryableError.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string_view name() const = 0;
  virtual Completion complete(const CompletionRequest& request) = 0;
};

/// Replays scripted completions keyed by (config_id, instance_id), falling
/// back to instance_id alone. Unscripted instances are an error.
class MockBackend final : public Backend {
 public:
  struct Entry {
    std::string answer;
    std::vector<double> logprobs;
    /// The first `fail_times` calls for this entry raise RetryableError.
    int fail_times = 0;
  };

  explicit MockBackend(std::string name = "mock") : name_(std::move(name)) {}

  /// JSONL script: {"instance_id", "config_id"?, "answer", "logprobs", "fail_times"?}
  static std::unique_ptr<MockBackend> from_file(const std::filesystem::path& path,
                                                std::string name = "mock");

  void add(std::string instance_id, Entry entry, std::string config_id = {});

  std::string_view name() const override { return name_; }
  Completion complete(const CompletionRequest& request) override;

  std::size_t calls() const { return calls_.load(); }
  const CompletionRequest* last_request() const;

 private:
  std::string name_;
  std::map<std::pair<std::string, std::string>, Entry> script_;  // (config_id, instance_id)
  std::map<std::pair<std::string, std::string>, int> failures_;
  mutable std::mutex mutex_;
  std::atomic<std::size_t> calls_{0};
  std::unique_ptr<CompletionRequest> last_;
};

struct ChatEndpoint {
  std::string base_url;  // e.g. http://localhost:8000/v1
  std::string model;
  std::string api_key_env;  // empty: no Authorization header
  std::chrono::seconds timeout{300};
};

/// OpenAI-style POST {base_url}/chat/completions with logprobs enabled.
class ChatCompletionsBackend final : public Backend {
 public:
  ChatCompletionsBackend(std::string name, ChatEndpoint endpoint);

  std::string_view name() const override { return name_; }
  Completion complete(const CompletionRequest& request) override;

 private:
  std::string name_;
  ChatEndpoint endpoint_;
  std::string api_key_;
};

/// Request body for a chat-completions call. Image parts are inlined as
/// base64 data URLs read from disk.
nlohmann::json build_chat_request(const PromptBundle& bundle, const std::string& model,
                                  const DecodeParams& params);

/// Extracts the first choice's text and per-token log-probabilities. A reply
/// without log-probabilities is a hard error.
Completion parse_chat_response(const nlohmann::json& reply);

struct BackendSpec {
  std::string type;  // "chat" or "mock"
  ChatEndpoint endpoint;
  std::filesystem::path script;
};

/// name -> backend definition, read from the "backends" object of a config.
class BackendRegistry {
 public:
  /// Relative script paths resolve against `base_dir`.
  static BackendRegistry from_json(const nlohmann::json& backends,
                                   const std::filesystem::path& base_dir = {});

  void add(std::string name, BackendSpec spec);
  bool contains(std::string_view name) const;
  const BackendSpec& spec(std::string_view name) const;
  std::vector<std::string> names() const;

  std::unique_ptr<Backend> create(std::string_view name) const;

 private:
  std::map<std::string, BackendSpec, std::less<>> specs_;
};

}  // namespace figshot
