#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace figshot {

class Corpus;

using Vector = std::vector<double>;

enum class EmbeddingSpace { Question, Image, Joint };

std::string_view to_string(EmbeddingSpace space);
EmbeddingSpace parse_embedding_space(std::string_view text);

inline constexpr double kUnitNormTolerance = 1e-6;

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);

/// v / |v|. Throws on a zero (or non-finite) vector.
Vector normalize(std::span<const double> v);

/// Mean of a question vector and an image vector, renormalized. Both inputs
/// must have the same dimension; antipodal inputs have no direction and throw.
Vector fuse(std::span<const double> question, std::span<const double> image);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);

struct EmbeddingRecord {
  std::string instance_id;
  EmbeddingSpace space = EmbeddingSpace::Question;
  Vector vector;
};

/// Unit-norm vectors per (space, instance). One dimension per space.
class EmbeddingStore {
 public:
  /// Rejects non-unit vectors, dimension mismatches and duplicates.
  void add(EmbeddingRecord record);

  bool has_space(EmbeddingSpace space) const { return spaces_.contains(space); }
  std::optional<std::size_t> dimension(EmbeddingSpace space) const;
  std::size_t size(EmbeddingSpace space) const;

  const Vector* find(EmbeddingSpace space, std::string_view instance_id) const;
  /// Throws figshot::Error naming the instance when absent.
  const Vector& get(EmbeddingSpace space, std::string_view instance_id) const;

  /// All records sorted by (space, instance_id).
  std::vector<EmbeddingRecord> records() const;

 private:
  struct SpaceData {
    std::size_t dimension = 0;
    std::unordered_map<std::string, Vector> vectors;
  };
  std::map<EmbeddingSpace, SpaceData> spaces_;
};

/// Appends every record of a JSONL embedding file into `store`.
void load_embeddings_into(EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_embeddings(std::span<const std::filesystem::path> paths);
void write_embeddings(const std::filesystem::path& path, std::span<const EmbeddingRecord> records);

struct RankedCandidate {
  std::string instance_id;
  double similarity = 0.0;

  friend bool operator==(const RankedCandidate&, const RankedCandidate&) = default;
};

/// One entry of a ranking problem. `order` is the corpus position used to
/// break exact similarity ties (lower first).
struct RankInput {
  std::string_view instance_id;
  std::size_t order = 0;
  std::span<const double> vector;
};

std::vector<RankedCandidate> rank_candidates(std::span<const double> query,
                                             std::span<const RankInput> candidates);

/// Ranks `candidate_ids` by cosine similarity to `query`, descending; exact
/// ties keep ascending corpus order.
std::vector<RankedCandidate> rank(const EmbeddingStore& store, EmbeddingSpace space,
                                  std::span<const double> query,
                                  std::span<const std::string> candidate_ids,
                                  const Corpus& corpus);
std::vector<RankedCandidate> rank(const EmbeddingStore& store, EmbeddingSpace space,
                                  std::string_view query_id,
                                  std::span<const std::string> candidate_ids,
                                  const Corpus& corpus);

}  // namespace figshot
