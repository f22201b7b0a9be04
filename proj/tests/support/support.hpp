#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"
#include "figshot/prediction.hpp"
#include "figshot/score_matrix.hpp"

namespace figshot::test {

std::filesystem::path fixture_dir();
std::filesystem::path golden_dir();

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Copies the fixture directory (without any cache) into `dest`.
void copy_fixtures(const std::filesystem::path& dest);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Minimal valid instance; options are filled in for mc4 types.
Instance make_instance(std::string id, std::string image_id, QuestionType type,
                       std::string figure_type = "line chart", int figs_numb = 1,
                       Split split = Split::Train);

Prediction make_pred(const std::string& instance_id, const std::string& config_id,
                     const std::string& answer, double confidence);

/// Random unit vector of dimension `dim`.
Vector random_unit(std::mt19937_64& rng, std::size_t dim);

struct SyntheticRetrieval {
  Corpus corpus;
  EmbeddingStore store;
};

/// 50 instances on 10 figures (5 questions each, every figure holding at
/// least one answerable and one unanswerable question) with random
/// question/image/joint vectors. Planted duplicates create exact similarity
/// ties that must resolve by corpus order.
SyntheticRetrieval synthetic_retrieval_corpus(std::uint64_t seed);

/// 200 figures x 7 question types following the development-set figure-type
/// distribution: 12 figure types, one at exactly 2% and three below it.
Corpus reference_distribution_corpus();

/// Random matrix with the given shape, values quantized to multiples of 1/20.
ScoreMatrix random_matrix(std::mt19937_64& rng, const std::vector<std::string>& rows,
                          const std::vector<std::string>& cols);

/// Removes every "created_at" field from JSON-lines text.
std::string strip_timestamps(const std::string& jsonl_text);

}  // namespace figshot::test
