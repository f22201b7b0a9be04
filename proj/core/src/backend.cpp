#include "figshot/backend.hpp"

#include <cstdlib>

#include <fmt/core.h>
#include <httplib.h>

#include "figshot/error.hpp"
#include "figshot/image.hpp"
#include "figshot/jsonl.hpp"
#include "http_util.hpp"

namespace figshot {

std::unique_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path,
                                                    std::string name) {
  auto backend = std::make_unique<MockBackend>(std::move(name));
  jsonl::for_each(path, [&](const nlohmann::json& record, std::size_t line) {
    try {
      Entry entry;
      entry.answer = record.at("answer").get<std::string>();
      entry.logprobs = record.at("logprobs").get<std::vector<double>>();
      entry.fail_times = record.value("fail_times", 0);
      backend->add(record.at("instance_id").get<std::string>(), std::move(entry),
                   record.value("config_id", ""));
    } catch (const nlohmann::json::exception& e) {
      throw Error(fmt::format("{}:{}: bad mock script entry: {}", path.string(), line, e.what()));
    }
  });
  return backend;
}

void MockBackend::add(std::string instance_id, Entry entry, std::string config_id) {
  std::lock_guard lock(mutex_);
  script_.insert_or_assign({std::move(config_id), std::move(instance_id)}, std::move(entry));
}

Completion MockBackend::complete(const CompletionRequest& request) {
  ++calls_;
  std::lock_guard lock(mutex_);
  last_ = std::make_unique<CompletionRequest>(request);
  auto key = std::make_pair(request.config_id, request.instance_id);
  auto it = script_.find(key);
  if (it == script_.end()) {
    key.first.clear();
    it = script_.find(key);
  }
  if (it == script_.end()) {
    throw Error(fmt::format("mock backend: no scripted completion for '{}' under {}",
                            request.instance_id, request.config_id));
  }
  if (int& failed = failures_[key]; failed < it->second.fail_times) {
    ++failed;
    throw RetryableError(fmt::format("mock backend: scripted transient failure {} for '{}'",
                                     failed, request.instance_id));
  }
  return {it->second.answer, it->second.logprobs};
}

const CompletionRequest* MockBackend::last_request() const {
  std::lock_guard lock(mutex_);
  return last_.get();
}

nlohmann::json build_chat_request(const PromptBundle& bundle, const std::string& model,
                                  const DecodeParams& params) {
  nlohmann::json messages = nlohmann::json::array();
  messages.push_back({{"role", "system"}, {"content", bundle.system_message}});
  for (const auto& turn : bundle.turns) {
    if (turn.role == Role::Assistant) {
      std::string text;
      for (const auto& part : turn.parts) text += part.content;
      messages.push_back({{"role", "assistant"}, {"content", text}});
      continue;
    }
    nlohmann::json content = nlohmann::json::array();
    for (const auto& part : turn.parts) {
      if (part.kind == PromptPart::Kind::Text) {
        content.push_back({{"type", "text"}, {"text", part.content}});
      } else {
        const std::string url = fmt::format("data:{};base64,{}", image_mime_type(part.content),
                                            read_image_base64(part.content));
        content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
      }
    }
    messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  }
  return {{"model", model},
          {"messages", std::move(messages)},
          {"temperature", params.temperature},
          {"max_tokens", params.max_tokens},
          {"logprobs", true}};
}

Completion parse_chat_response(const nlohmann::json& reply) {
  if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
    throw Error("chat response has no choices");
  }
  const auto& choice = reply["choices"][0];
  Completion out;
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    out.text = choice["message"]["content"].get<std::string>();
  } else if (choice.contains("text") && choice["text"].is_string()) {
    out.text = choice["text"].get<std::string>();
  } else {
    throw Error("chat response has no message content");
  }

  const auto logprobs = choice.find("logprobs");
  if (logprobs == choice.end() || logprobs->is_null()) {
    throw Error("chat response carries no logprobs; confidence cannot be computed");
  }
  if (logprobs->contains("content") && (*logprobs)["content"].is_array()) {
    for (const auto& token : (*logprobs)["content"]) {
      out.token_logprobs.push_back(token.at("logprob").get<double>());
    }
  } else if (logprobs->contains("token_logprobs") && (*logprobs)["token_logprobs"].is_array()) {
    out.token_logprobs = (*logprobs)["token_logprobs"].get<std::vector<double>>();
  } else {
    throw Error("chat response logprobs have an unrecognized layout");
  }
  if (out.token_logprobs.empty()) throw Error("chat response has an empty logprob list");
  return out;
}

ChatCompletionsBackend::ChatCompletionsBackend(std::string name, ChatEndpoint endpoint)
    : name_(std::move(name)), endpoint_(std::move(endpoint)) {
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (key == nullptr) {
      throw Error(fmt::format("backend '{}': environment variable {} is not set", name_,
                              endpoint_.api_key_env));
    }
    api_key_ = key;
  }
}

Completion ChatCompletionsBackend::complete(const CompletionRequest& request) {
  const auto body = build_chat_request(request.bundle, endpoint_.model, request.params).dump();
  const auto url = detail::parse_url(endpoint_.base_url);

  httplib::Client client(url.origin);
  client.set_connection_timeout(endpoint_.timeout);
  client.set_read_timeout(endpoint_.timeout);
  client.set_write_timeout(endpoint_.timeout);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const auto result = client.Post(url.path + "/chat/completions", headers, body,
                                  "application/json");
  if (!result) {
    throw RetryableError(fmt::format("backend '{}' unreachable: {}", name_,
                                     httplib::to_string(result.error())));
  }
  if (detail::is_transient_status(result->status)) {
    throw RetryableError(fmt::format("backend '{}' returned HTTP {}", name_, result->status));
  }
  if (result->status != 200) {
    throw Error(fmt::format("backend '{}' returned HTTP {}: {}", name_, result->status,
                            result->body.substr(0, 500)));
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(result->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("backend '{}' reply is not JSON: {}", name_, e.what()));
  }
  return parse_chat_response(reply);
}

BackendRegistry BackendRegistry::from_json(const nlohmann::json& backends,
                                           const std::filesystem::path& base_dir) {
  if (!backends.is_object()) throw Error("'backends' must be an object of name -> definition");
  BackendRegistry registry;
  for (const auto& [name, def] : backends.items()) {
    static const std::set<std::string> allowed = {"type",        "base_url", "model",
                                                  "api_key_env", "script",   "timeout_s"};
    for (const auto& [key, value] : def.items()) {
      if (!allowed.contains(key)) {
        throw Error(fmt::format("backend '{}': unknown key '{}'", name, key));
      }
    }
    BackendSpec spec;
    spec.type = def.value("type", "chat");
    if (spec.type == "mock") {
      if (!def.contains("script")) throw Error(fmt::format("mock backend '{}' needs 'script'", name));
      spec.script = def.at("script").get<std::string>();
      if (spec.script.is_relative() && !base_dir.empty()) spec.script = base_dir / spec.script;
    } else if (spec.type == "chat") {
      if (!def.contains("base_url") || !def.contains("model")) {
        throw Error(fmt::format("backend '{}' needs 'base_url' and 'model'", name));
      }
      spec.endpoint.base_url = def.at("base_url").get<std::string>();
      spec.endpoint.model = def.at("model").get<std::string>();
      spec.endpoint.api_key_env = def.value("api_key_env", "");
      spec.endpoint.timeout = std::chrono::seconds(def.value("timeout_s", 300));
    } else {
      throw Error(fmt::format("backend '{}': unknown type '{}' (allowed: chat, mock)", name,
                              spec.type));
    }
    registry.add(name, std::move(spec));
  }
  return registry;
}

void BackendRegistry::add(std::string name, BackendSpec spec) {
  if (name.empty() || name.find(':') != std::string::npos) {
    throw Error(fmt::format("invalid backend name '{}'", name));
  }
  specs_.insert_or_assign(std::move(name), std::move(spec));
}

bool BackendRegistry::contains(std::string_view name) const { return specs_.contains(name); }

const BackendSpec& BackendRegistry::spec(std::string_view name) const {
  const auto it = specs_.find(name);
  if (it == specs_.end()) throw Error(fmt::format("unknown backend '{}'", name));
  return it->second;
}

std::vector<std::string> BackendRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& entry : specs_) out.push_back(entry.first);
  return out;
}

std::unique_ptr<Backend> BackendRegistry::create(std::string_view name) const {
  const auto& s = spec(name);
  if (s.type == "mock") return MockBackend::from_file(s.script, std::string(name));
  return std::make_unique<ChatCompletionsBackend>(std::string(name), s.endpoint);
}

}  // namespace figshot
