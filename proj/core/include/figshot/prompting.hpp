#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "figshot/corpus.hpp"
#include "figshot/retrieval.hpp"

namespace figshot {

/// The exact answer expected for unanswerable questions.
std::string_view canonical_refusal();

enum class Role { User, Assistant };
std::string_view to_string(Role role);

struct PromptPart {
  enum class Kind { Text, Image };
  Kind kind = Kind::Text;
  /// Text content, or the image file path for image parts.
  std::string content;

  static PromptPart text(std::string s) { return {Kind::Text, std::move(s)}; }
  static PromptPart image(std::string path) { return {Kind::Image, std::move(path)}; }

  friend bool operator==(const PromptPart&, const PromptPart&) = default;
};

struct Turn {
  Role role = Role::User;
  std::vector<PromptPart> parts;

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// System message plus ordered turns; few-shot examples come first as
/// user/assistant pairs and the query is the final user turn.
struct PromptBundle {
  std::string system_message;
  std::vector<Turn> turns;

  friend bool operator==(const PromptBundle&, const PromptBundle&) = default;
};

/// Named sections of the versioned prompt template resource.
class PromptTemplate {
 public:
  /// Parses "@@ name" delimited sections; throws if a required one is missing.
  static PromptTemplate parse(std::string_view text);
  /// The template compiled into the library.
  static const PromptTemplate& builtin();

  const std::string& section(std::string_view name) const;

 private:
  std::map<std::string, std::string, std::less<>> sections_;
};

/// Single-pass `{name}` substitution; unknown placeholders are left verbatim.
std::string substitute(std::string_view text, const std::map<std::string, std::string>& values);

/// "A: first; B: second; ..."
std::string format_answer_options(const std::vector<AnswerOption>& options);

/// Parts of the user turn asking `instance`: a label, the image, then the
/// question text with metadata and task instructions.
std::vector<PromptPart> render_query(const Instance& instance,
                                     const PromptTemplate& tmpl = PromptTemplate::builtin());

PromptBundle render_bundle(const Instance& query, const FewShotSelection& selection,
                           const Corpus& corpus,
                           const PromptTemplate& tmpl = PromptTemplate::builtin());

/// Human-readable dump, stable byte-for-byte for identical bundles.
std::string dump_text(const PromptBundle& bundle);

}  // namespace figshot
