#include "project_config.hpp"

#include <set>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"

namespace figshot::cli {

namespace fs = std::filesystem;

namespace {

void reject_unknown(const nlohmann::json& object, const std::set<std::string>& allowed,
                    std::string_view where) {
  if (!object.is_object()) throw Error(fmt::format("{} must be an object", where));
  for (const auto& item : object.items()) {
    if (!allowed.contains(item.key())) {
      throw Error(fmt::format("unknown key '{}' in {}", item.key(), where));
    }
  }
}

fs::path resolve_existing(const fs::path& base_dir, const nlohmann::json& value,
                          std::string_view what) {
  if (!value.is_string()) throw Error(fmt::format("{} must be a path string", what));
  fs::path path = value.get<std::string>();
  if (path.is_relative()) path = base_dir / path;
  path = path.lexically_normal();
  if (!fs::exists(path)) throw Error(fmt::format("{} not found: {}", what, path.string()));
  return path;
}

std::vector<fs::path> path_list(const fs::path& base_dir, const nlohmann::json& value,
                                std::string_view what) {
  std::vector<fs::path> out;
  if (value.is_string()) {
    out.push_back(resolve_existing(base_dir, value, what));
  } else if (value.is_array()) {
    for (const auto& entry : value) out.push_back(resolve_existing(base_dir, entry, what));
  } else {
    throw Error(fmt::format("{} must be a path or a list of paths", what));
  }
  return out;
}

}  // namespace

RetrievalSpace parse_retrieval_space(std::string_view text) {
  if (text == "question") return RetrievalSpace::Question;
  if (text == "fused_question_image") return RetrievalSpace::FusedQuestionImage;
  if (text == "joint") return RetrievalSpace::Joint;
  throw Error(fmt::format(
      "unknown retrieval space '{}' (allowed: question, fused_question_image, joint)", text));
}

std::string_view config_key(RetrievalSpace space) {
  switch (space) {
    case RetrievalSpace::Question: return "question";
    case RetrievalSpace::FusedQuestionImage: return "fused_question_image";
    case RetrievalSpace::Joint: return "joint";
  }
  return "unknown";
}

ProjectConfig ProjectConfig::from_json(const nlohmann::json& config, const fs::path& base_dir) {
  reject_unknown(config,
                 {"corpus", "figure_types", "embeddings", "backends", "cache_dir", "plans",
                  "decode", "concurrency", "retry", "embed_service"},
                 "project config");
  ProjectConfig out;
  try {
    if (!config.contains("corpus")) throw Error("project config needs 'corpus'");
    out.corpus = path_list(base_dir, config.at("corpus"), "corpus file");
    if (config.contains("figure_types")) {
      out.figure_types = config.at("figure_types").get<std::vector<std::string>>();
    }
    if (config.contains("embeddings")) {
      const auto& emb = config.at("embeddings");
      reject_unknown(emb, {"question", "fused_question_image", "joint"}, "embeddings");
      for (const auto& [key, value] : emb.items()) {
        out.embeddings[parse_retrieval_space(key)] =
            path_list(base_dir, value, fmt::format("{} embeddings file", key));
      }
    }
    if (config.contains("backends")) {
      out.backends = BackendRegistry::from_json(config.at("backends"), base_dir);
    }
    fs::path cache = config.value("cache_dir", std::string("cache"));
    out.cache_dir = (cache.is_relative() ? base_dir / cache : cache).lexically_normal();
    if (config.contains("plans")) {
      const auto& plans = config.at("plans");
      if (!plans.is_object()) throw Error("plans must be an object of name -> file");
      for (const auto& [name, value] : plans.items()) {
        out.plans[name] = resolve_existing(base_dir, value, fmt::format("plan '{}'", name));
      }
    }
    if (config.contains("decode")) {
      const auto& decode = config.at("decode");
      reject_unknown(decode, {"temperature", "max_tokens"}, "decode");
      out.decode.temperature = decode.value("temperature", out.decode.temperature);
      out.decode.max_tokens = decode.value("max_tokens", out.decode.max_tokens);
      if (out.decode.max_tokens < 1) throw Error("decode.max_tokens must be >= 1");
    }
    if (config.contains("concurrency")) {
      const auto c = config.at("concurrency").get<long long>();
      if (c < 1) throw Error("concurrency must be >= 1");
      out.concurrency = static_cast<std::size_t>(c);
    }
    if (config.contains("retry")) {
      const auto& retry = config.at("retry");
      reject_unknown(retry, {"max_attempts", "initial_delay_ms", "max_delay_ms"}, "retry");
      out.retry_attempts = retry.value("max_attempts", out.retry_attempts);
      out.retry_initial_delay = std::chrono::milliseconds(
          retry.value("initial_delay_ms", static_cast<long long>(out.retry_initial_delay.count())));
      out.retry_max_delay = std::chrono::milliseconds(
          retry.value("max_delay_ms", static_cast<long long>(out.retry_max_delay.count())));
      if (out.retry_attempts < 1) throw Error("retry.max_attempts must be >= 1");
    }
    out.embed_service = config.value("embed_service", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("malformed project config: {}", e.what()));
  }
  return out;
}

ProjectConfig ProjectConfig::load(const fs::path& path) {
  nlohmann::json config;
  try {
    config = nlohmann::json::parse(jsonl::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(fmt::format("{}: malformed JSON: {}", path.string(), e.what()));
  }
  try {
    auto out = from_json(config, fs::absolute(path).parent_path());
    out.source = path;
    return out;
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

RetryPolicy ProjectConfig::retry_policy() const {
  RetryPolicy policy;
  policy.max_attempts = retry_attempts;
  policy.initial_delay = retry_initial_delay;
  policy.max_delay = retry_max_delay;
  return policy;
}

}  // namespace figshot::cli
