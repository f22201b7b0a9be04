#include "figshot/prompting.hpp"

#include <fmt/core.h>

#include "figshot/error.hpp"
#include "figshot/resources.hpp"

namespace figshot {

namespace {

constexpr std::string_view kRefusal =
    "It is not possible to answer this question based only on the provided data.";

constexpr std::string_view kRequiredSections[] = {
    "system",  "image_label", "question",  "answer_options", "info_header", "caption",
    "compound", "single",     "figure_type", "task_header",  "task_options", "task_open",
    "instructions",
};

}  // namespace

std::string_view canonical_refusal() { return kRefusal; }

std::string_view to_string(Role role) { return role == Role::User ? "user" : "assistant"; }

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate out;
  std::string current;
  std::string body;
  bool in_section = false;
  const auto flush = [&] {
    if (!in_section) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (!out.sections_.emplace(current, body).second) {
      throw Error(fmt::format("prompt template: duplicate section '{}'", current));
    }
  };

  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.starts_with("@@ ")) {
      flush();
      current = std::string(line.substr(3));
      body.clear();
      in_section = true;
    } else if (in_section) {
      body.append(line);
      body.push_back('\n');
    }
  }
  flush();

  for (const auto name : kRequiredSections) {
    if (!out.sections_.contains(name)) {
      throw Error(fmt::format("prompt template: missing section '{}'", name));
    }
  }
  return out;
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate tmpl = parse(resources::prompt_template);
  return tmpl;
}

const std::string& PromptTemplate::section(std::string_view name) const {
  const auto it = sections_.find(name);
  if (it == sections_.end()) throw Error(fmt::format("prompt template: no section '{}'", name));
  return it->second;
}

std::string substitute(std::string_view text, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find('{', pos);
    if (open == std::string_view::npos) break;
    const auto close = text.find('}', open);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    const auto it = values.find(std::string(text.substr(open + 1, close - open - 1)));
    if (it != values.end()) {
      out.append(it->second);
    } else {
      out.append(text.substr(open, close - open + 1));
    }
    pos = close + 1;
  }
  out.append(text.substr(std::min(pos, text.size())));
  return out;
}

std::string format_answer_options(const std::vector<AnswerOption>& options) {
  std::string out;
  for (std::size_t i = 0; i < options.size(); ++i) {
    if (i > 0) out += "; ";
    out += options[i].key;
    out += ": ";
    out += options[i].text;
  }
  return out;
}

std::vector<PromptPart> render_query(const Instance& instance, const PromptTemplate& tmpl) {
  if (instance.caption.empty()) {
    throw Error(fmt::format("instance '{}' has no caption", instance.instance_id));
  }
  if (instance.figure_type.empty()) {
    throw Error(fmt::format("instance '{}' has no figure_type", instance.instance_id));
  }
  const std::string image = instance.image_path.empty() ? instance.image_id : instance.image_path;
  const bool has_options = !instance.answer_options.empty();
  const std::map<std::string, std::string> values = {
      {"question", instance.question},
      {"answer_options", format_answer_options(instance.answer_options)},
      {"caption", instance.caption},
      {"figs_numb", std::to_string(instance.figs_numb)},
      {"figure_type", instance.figure_type},
  };

  std::vector<std::string_view> order = {"question"};
  if (has_options) order.push_back("answer_options");
  order.insert(order.end(), {"info_header", "caption"});
  order.push_back(instance.compound ? "compound" : "single");
  order.insert(order.end(), {"figure_type", "task_header"});
  order.push_back(has_options ? "task_options" : "task_open");
  order.push_back("instructions");

  std::string body;
  for (const auto name : order) {
    if (!body.empty()) body.push_back('\n');
    body += substitute(tmpl.section(name), values);
  }
  return {PromptPart::text(tmpl.section("image_label")), PromptPart::image(image),
          PromptPart::text(std::move(body))};
}

PromptBundle render_bundle(const Instance& query, const FewShotSelection& selection,
                           const Corpus& corpus, const PromptTemplate& tmpl) {
  PromptBundle bundle;
  bundle.system_message = tmpl.section("system");
  for (const auto& id : selection.example_ids) {
    const auto& example = corpus.get(id);
    if (example.gold_answer.empty()) {
      throw Error(fmt::format("few-shot example '{}' has no gold_answer", id));
    }
    bundle.turns.push_back({Role::User, render_query(example, tmpl)});
    bundle.turns.push_back({Role::Assistant, {PromptPart::text(example.gold_answer)}});
  }
  bundle.turns.push_back({Role::User, render_query(query, tmpl)});
  return bundle;
}

std::string dump_text(const PromptBundle& bundle) {
  std::string out = "=== system ===\n" + bundle.system_message + "\n";
  for (const auto& turn : bundle.turns) {
    out += fmt::format("=== {} ===\n", to_string(turn.role));
    for (const auto& part : turn.parts) {
      if (part.kind == PromptPart::Kind::Image) {
        out += fmt::format("[image: {}]\n", part.content);
      } else {
        out += part.content + "\n";
      }
    }
  }
  return out;
}

}  // namespace figshot
