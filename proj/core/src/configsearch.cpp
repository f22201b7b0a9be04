#include "figshot/configsearch.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include <fmt/core.h>

#include "figshot/error.hpp"

namespace figshot {

namespace {

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Unbiased draw in [0, n) from a 64-bit engine.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

std::string argmax(const std::vector<std::string>& cols, const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < cols.size(); ++c) {
    if (values[c] > values[best] || (values[c] == values[best] && cols[c] < cols[best])) best = c;
  }
  return cols[best];
}

}  // namespace

std::string split_group_name(const std::string& split_type, QuestionType type) {
  return split_type + "/" + std::string(to_string(type));
}

GroupingPlan build_groups(const Corpus& corpus, const GroupingOptions& options) {
  GroupingPlan plan;
  plan.others_threshold = options.others_threshold;
  plan.others_name = options.others_name;
  if (corpus.empty()) return plan;

  std::map<std::string, std::set<std::string>> figures_by_type;
  std::set<std::string> all_figures;
  for (const auto& instance : corpus.instances()) {
    figures_by_type[instance.figure_type].insert(instance.image_id);
    all_figures.insert(instance.image_id);
  }

  const auto wanted = normalize_figure_type(options.split_type);
  if (figures_by_type.contains(wanted)) {
    plan.split_type = wanted;
  } else {
    std::size_t best = 0;
    for (const auto& [type, figures] : figures_by_type) {
      if (figures.size() > best) {
        best = figures.size();
        plan.split_type = type;
      }
    }
  }

  const auto total = static_cast<double>(all_figures.size());
  for (const auto& [type, figures] : figures_by_type) {
    if (type == plan.split_type) continue;
    if (static_cast<double>(figures.size()) / total < options.others_threshold) {
      plan.merged_types.insert(type);
    } else {
      plan.homogeneous_types.insert(type);
    }
  }

  for (const auto& instance : corpus.instances()) {
    std::string group;
    if (instance.figure_type == plan.split_type) {
      group = split_group_name(plan.split_type, instance.question_type);
    } else if (plan.merged_types.contains(instance.figure_type)) {
      group = plan.others_name;
    } else {
      group = instance.figure_type;
    }
    plan.groups[group].push_back(instance.instance_id);
  }
  return plan;
}

std::uint64_t mix_seed(std::uint64_t value) {
  std::uint64_t z = value + 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::vector<std::vector<std::size_t>> make_folds(const ScoreMatrix& matrix,
                                                 std::span<const std::string> group,
                                                 std::size_t k, std::uint64_t seed) {
  if (group.empty()) throw Error("cannot fold an empty group");
  if (k == 0) throw Error("fold count must be positive");
  std::vector<std::size_t> rows;
  rows.reserve(group.size());
  for (const auto& id : group) {
    const auto r = matrix.row_index(id);
    if (!r) throw Error(fmt::format("score matrix has no row for '{}'", id));
    rows.push_back(*r);
  }

  std::mt19937_64 rng(seed);
  for (std::size_t i = rows.size(); i > 1; --i) {
    std::swap(rows[i - 1], rows[bounded(rng, i)]);
  }
  const std::size_t folds = rows.size() < k ? 1 : k;
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * rows.size() / folds;
    const std::size_t end = (f + 1) * rows.size() / folds;
    out[f].assign(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                  rows.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return out;
}

FoldScores fold_scores(const ScoreMatrix& matrix, std::span<const std::string> group,
                       std::size_t k, std::uint64_t seed) {
  FoldScores out;
  out.folds = make_folds(matrix, group, k, seed);
  const std::size_t n_cols = matrix.cols().size();
  for (const auto& fold : out.folds) {
    std::vector<double> means(n_cols, 0.0);
    for (std::size_t c = 0; c < n_cols; ++c) {
      double sum = 0.0;
      for (const auto r : fold) sum += matrix.at(r, c);
      means[c] = sum / static_cast<double>(fold.size());
    }
    out.means.push_back(std::move(means));
  }
  return out;
}

ConfigSelection select_best(const ScoreMatrix& matrix, std::span<const std::string> group,
                            const SelectOptions& options) {
  const auto& cols = matrix.cols();
  if (cols.empty()) throw Error("select_best: no configurations to choose from");
  if (group.empty()) throw Error("select_best: empty group");

  ConfigSelection out;
  std::vector<double> delta_sums(cols.size(), 0.0);
  std::size_t fold_count = 0;
  const std::size_t cap = std::max({options.max_repeats, options.min_repeats, std::size_t{1}});

  for (std::size_t repeat = 0; repeat < cap; ++repeat) {
    const std::uint64_t seed = mix_seed(options.seed + repeat);
    out.seeds.push_back(seed);
    const auto scores = fold_scores(matrix, group, options.folds, seed);
    for (const auto& means : scores.means) {
      const double best = *std::max_element(means.begin(), means.end());
      for (std::size_t c = 0; c < cols.size(); ++c) delta_sums[c] += means[c] - best;
      ++fold_count;
    }

    std::vector<double> mean_deltas(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) {
      mean_deltas[c] = delta_sums[c] / static_cast<double>(fold_count);
    }
    out.winner_history.push_back(argmax(cols, mean_deltas));
    out.repeats = repeat + 1;

    const std::size_t window = std::max<std::size_t>(1, options.stable_repeats);
    if (out.repeats >= options.min_repeats && out.winner_history.size() >= window) {
      const auto tail = out.winner_history.end() - static_cast<std::ptrdiff_t>(window);
      if (std::all_of(tail, out.winner_history.end(),
                      [&](const std::string& w) { return w == out.winner_history.back(); })) {
        break;
      }
    }
  }

  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.scores[cols[c]] = delta_sums[c] / static_cast<double>(fold_count);
  }
  out.winner = out.winner_history.back();
  return out;
}

nlohmann::json TypeTableSearch::diagnostics() const {
  nlohmann::json groups = nlohmann::json::object();
  for (const auto& [name, sel] : selections) {
    const auto members = grouping.groups.find(name);
    groups[name] = {{"size", members == grouping.groups.end() ? 0 : members->second.size()},
                    {"winner", sel.winner},
                    {"mean_deltas", sel.scores},
                    {"repeats", sel.repeats},
                    {"seeds", sel.seeds},
                    {"winner_history", sel.winner_history}};
  }
  return {{"split_type", grouping.split_type},
          {"others_threshold", grouping.others_threshold},
          {"homogeneous_types", grouping.homogeneous_types},
          {"merged_types", grouping.merged_types},
          {"group_count", grouping.groups.size()},
          {"groups", std::move(groups)},
          {"plan", to_json(plan)}};
}

TypeTableSearch build_type_table(const ScoreMatrix& matrix, const Corpus& corpus,
                                 const SelectOptions& select_options,
                                 const GroupingOptions& grouping_options) {
  if (corpus.empty()) throw Error("build_type_table: empty corpus");
  for (const auto& instance : corpus.instances()) {
    if (!matrix.row_index(instance.instance_id)) {
      throw Error(fmt::format("score matrix has no row for '{}'", instance.instance_id));
    }
  }

  TypeTableSearch out;
  out.grouping = build_groups(corpus, grouping_options);
  const auto choose = [&](const std::string& name, std::span<const std::string> ids) {
    SelectOptions opts = select_options;
    opts.seed = select_options.seed ^ fnv1a(name);
    auto selection = select_best(matrix, ids, opts);
    auto winner = selection.winner;
    out.selections.emplace(name, std::move(selection));
    return winner;
  };
  const auto constant_row = [](const std::string& config) {
    QuestionRouting row;
    for (const auto type : kAllQuestionTypes) row[type] = config;
    return row;
  };

  for (const auto& [name, ids] : out.grouping.groups) {
    if (name.starts_with(out.grouping.split_type + "/")) continue;
    const auto winner = choose(name, ids);
    out.plan.table[name] = constant_row(winner);
  }

  const auto& split = out.grouping.split_type;
  QuestionRouting split_row;
  std::string split_fallback;
  for (const auto type : kAllQuestionTypes) {
    const auto group = split_group_name(split, type);
    if (const auto it = out.grouping.groups.find(group); it != out.grouping.groups.end()) {
      split_row[type] = choose(group, it->second);
      continue;
    }
    // No instances of this question type: use the split type as a whole.
    if (split_fallback.empty()) {
      std::vector<std::string> all_split;
      for (const auto& instance : corpus.instances()) {
        if (instance.figure_type == split) all_split.push_back(instance.instance_id);
      }
      split_fallback = choose(split, all_split);
    }
    split_row[type] = split_fallback;
  }
  out.plan.table[split] = std::move(split_row);

  out.plan.default_group = out.grouping.others_name;
  if (!out.plan.table.contains(out.plan.default_group)) {
    // No rare figure types: unseen types use the winner over the whole pool.
    const auto all = corpus.ids();
    out.plan.table[out.plan.default_group] = constant_row(choose(out.plan.default_group, all));
  }
  return out;
}

}  // namespace figshot
