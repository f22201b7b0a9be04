#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "figshot/retrieval.hpp"

namespace figshot {

/// Short token naming a retrieval setup: "0s", "1s_q_f", "2s_q_img_nf",
/// "1s_joint_f". q = question similarity, q_img = fused question+image,
/// joint = joint vision-language embedding, f/nf = filtered/unfiltered.
std::string spec_token(const RetrievalSpec& spec);
RetrievalSpec parse_spec_token(std::string_view token);

/// One experimental configuration, identified as "<backend>:<spec token>".
struct RunConfig {
  std::string backend;
  RetrievalSpec spec;
  std::string notes;

  std::string id() const;
  static RunConfig parse(std::string_view config_id);

  friend bool operator==(const RunConfig& a, const RunConfig& b) {
    return a.backend == b.backend && a.spec == b.spec;
  }
};

/// exp(mean(token_logprobs)) with natural-log probabilities. Throws on an
/// empty list, a positive or non-finite entry, or an underflow to zero.
double confidence(std::span<const double> token_logprobs);

struct Prediction {
  std::string instance_id;
  std::string config_id;
  std::string answer_text;
  std::vector<double> token_logprobs;
  double confidence = 0.0;
  std::string created_at;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

/// Builds a prediction, deriving confidence from the log-probabilities.
Prediction make_prediction(std::string instance_id, std::string config_id, std::string answer_text,
                           std::vector<double> token_logprobs, std::string created_at);

nlohmann::json to_json(const Prediction& prediction);
/// Parses and checks the stored confidence against the log-probabilities.
Prediction prediction_from_json(const nlohmann::json& record);

/// True iff the trimmed answer equals the canonical refusal exactly.
bool is_refusal(std::string_view answer_text);
bool is_refusal(const Prediction& prediction);

/// Current UTC time as "YYYY-MM-DDTHH:MM:SSZ".
std::string utc_timestamp();

}  // namespace figshot
