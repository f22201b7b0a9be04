#include "figshot/prediction.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/prompting.hpp"

namespace figshot {

namespace {

constexpr double kConfidenceTolerance = 1e-9;

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

}  // namespace

std::string spec_token(const RetrievalSpec& spec) {
  validate(spec);
  if (spec.shots == 0) return "0s";
  std::string space;
  switch (spec.space) {
    case RetrievalSpace::Question: space = "q"; break;
    case RetrievalSpace::FusedQuestionImage: space = "q_img"; break;
    case RetrievalSpace::Joint: space = "joint"; break;
  }
  return fmt::format("{}s_{}_{}", spec.shots, space,
                     spec.filter == FilterMode::Filtered ? "f" : "nf");
}

RetrievalSpec parse_spec_token(std::string_view token) {
  const auto fail = [&] {
    return Error(fmt::format(
        "malformed configuration token '{}' (expected 0s or <1|2>s_<q|q_img|joint>_<f|nf>)",
        token));
  };
  if (token == "0s") return {};
  if (token.size() < 3 || (token[0] != '1' && token[0] != '2') || token.substr(1, 2) != "s_") {
    throw fail();
  }
  RetrievalSpec spec;
  spec.shots = token[0] - '0';
  auto rest = token.substr(3);
  if (rest.ends_with("_nf")) {
    spec.filter = FilterMode::Unfiltered;
    rest.remove_suffix(3);
  } else if (rest.ends_with("_f")) {
    spec.filter = FilterMode::Filtered;
    rest.remove_suffix(2);
  } else {
    throw fail();
  }
  if (rest == "q") {
    spec.space = RetrievalSpace::Question;
  } else if (rest == "q_img") {
    spec.space = RetrievalSpace::FusedQuestionImage;
  } else if (rest == "joint") {
    spec.space = RetrievalSpace::Joint;
  } else {
    throw fail();
  }
  return spec;
}

std::string RunConfig::id() const { return backend + ":" + spec_token(spec); }

RunConfig RunConfig::parse(std::string_view config_id) {
  const auto colon = config_id.find(':');
  if (colon == std::string_view::npos || colon == 0) {
    throw Error(fmt::format("configuration id '{}' must look like <backend>:<token>", config_id));
  }
  RunConfig out;
  out.backend = std::string(config_id.substr(0, colon));
  if (out.backend.find_first_of(" \t/") != std::string::npos) {
    throw Error(fmt::format("invalid backend name '{}'", out.backend));
  }
  out.spec = parse_spec_token(config_id.substr(colon + 1));
  return out;
}

double confidence(std::span<const double> token_logprobs) {
  if (token_logprobs.empty()) throw Error("confidence: no token log-probabilities");
  for (const double lp : token_logprobs) {
    if (!std::isfinite(lp)) throw Error("confidence: non-finite log-probability");
    if (lp > 0.0) throw Error(fmt::format("confidence: positive log-probability {}", lp));
  }
  const double mean = std::accumulate(token_logprobs.begin(), token_logprobs.end(), 0.0) /
                      static_cast<double>(token_logprobs.size());
  const double value = std::exp(mean);
  if (!(value > 0.0)) throw Error("confidence: underflow to zero");
  return std::min(value, 1.0);
}

Prediction make_prediction(std::string instance_id, std::string config_id, std::string answer_text,
                           std::vector<double> token_logprobs, std::string created_at) {
  Prediction p;
  p.confidence = confidence(token_logprobs);
  p.instance_id = std::move(instance_id);
  p.config_id = std::move(config_id);
  p.answer_text = std::move(answer_text);
  p.token_logprobs = std::move(token_logprobs);
  p.created_at = std::move(created_at);
  return p;
}

nlohmann::json to_json(const Prediction& p) {
  return {{"instance_id", p.instance_id},   {"config_id", p.config_id},
          {"answer_text", p.answer_text},   {"token_logprobs", p.token_logprobs},
          {"confidence", p.confidence},     {"created_at", p.created_at}};
}

Prediction prediction_from_json(const nlohmann::json& record) {
  Prediction p;
  try {
    p.instance_id = record.at("instance_id").get<std::string>();
    p.config_id = record.at("config_id").get<std::string>();
    p.answer_text = record.at("answer_text").get<std::string>();
    p.token_logprobs = record.at("token_logprobs").get<std::vector<double>>();
    p.confidence = record.at("confidence").get<double>();
    p.created_at = record.value("created_at", "");
  } catch (const nlohmann::json::exception& e) {
    throw Error(fmt::format("bad prediction record: {}", e.what()));
  }
  const double expected = confidence(p.token_logprobs);
  if (std::abs(expected - p.confidence) > kConfidenceTolerance) {
    throw Error(fmt::format("prediction ({}, {}): stored confidence {} disagrees with {}",
                            p.instance_id, p.config_id, p.confidence, expected));
  }
  return p;
}

bool is_refusal(std::string_view answer_text) { return trim(answer_text) == canonical_refusal(); }

bool is_refusal(const Prediction& prediction) { return is_refusal(prediction.answer_text); }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace figshot
