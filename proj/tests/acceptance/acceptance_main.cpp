// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Expected values come from hand computation or from the oracles in
// tests/support, never from the code under test.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "figshot/configsearch.hpp"
#include "figshot/corpus.hpp"
#include "figshot/embeddings.hpp"
#include "figshot/ensemble.hpp"
#include "figshot/error.hpp"
#include "figshot/jsonl.hpp"
#include "figshot/metrics.hpp"
#include "figshot/prediction.hpp"
#include "figshot/prompting.hpp"
#include "figshot/retrieval.hpp"
#include "figshot/run_cache.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace figshot;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// Collects the first few problems of one criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (problems_.size() < 5) problems_.push_back(what);
    ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s = fmt::format("{} failed check(s)", failed_);
    for (const auto& p : problems_) s += "; " + p;
    return s;
  }

 private:
  std::vector<std::string> problems_;
  std::size_t failed_ = 0;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

// ---- AC1 -------------------------------------------------------------------

struct RougeCase {
  const char* candidate;
  const char* reference;
  double r1_p, r1_r, r1_f;
  double rl_p, rl_r, rl_f;
};

void rouge_suite(Check& check) {
  const auto start = Clock::now();
  const std::string refusal(canonical_refusal());
  // Hand-computed: unigram overlap with clipping, LCS over lowercase
  // alphanumeric tokens, F1 = 2PR/(P+R).
  const std::vector<RougeCase> cases = {
      {"the cat sat on the mat", "the cat is on the mat", 5. / 6, 5. / 6, 5. / 6, 5. / 6, 5. / 6, 5. / 6},
      {"the cat sat", "the sat cat", 1, 1, 1, 2. / 3, 2. / 3, 2. / 3},
      {"a b c", "a b c", 1, 1, 1, 1, 1, 1},
      {"alpha beta", "gamma delta", 0, 0, 0, 0, 0, 0},
      {"", "", 1, 1, 1, 1, 1, 1},
      {"", "x", 0, 0, 0, 0, 0, 0},
      {"x", "", 0, 0, 0, 0, 0, 0},
      {"the the the", "the cat", 1. / 3, 1. / 2, 0.4, 1. / 3, 1. / 2, 0.4},
      {"Yes", "yes", 1, 1, 1, 1, 1, 1},
      {"A,C", "A, C", 1, 1, 1, 1, 1, 1},
      {"71.2", "71.2 percent", 1, 2. / 3, 0.8, 1, 2. / 3, 0.8},
      {"light grey", "grey", 0.5, 1, 2. / 3, 0.5, 1, 2. / 3},
      {"B", "A,B", 1, 0.5, 2. / 3, 1, 0.5, 2. / 3},
      {"a b c d", "d c b a", 1, 1, 1, 0.25, 0.25, 0.25},
      {"a b a b", "a a b b", 1, 1, 1, 0.75, 0.75, 0.75},
      {"one two three four five", "one three five", 0.6, 1, 0.75, 0.6, 1, 0.75},
      {"x y z", "x q z w", 2. / 3, 0.5, 4. / 7, 2. / 3, 0.5, 4. / 7},
      {refusal.c_str(), refusal.c_str(), 1, 1, 1, 1, 1, 1},
      {refusal.c_str(), "It is not possible", 4. / 14, 1, 4. / 9, 4. / 14, 1, 4. / 9},
      {"b a", "a b a", 1, 2. / 3, 0.8, 1, 2. / 3, 0.8},
      {"the cat", "cat the the", 1, 2. / 3, 0.8, 0.5, 1. / 3, 0.4},
      {"Hello, World!", "hello world", 1, 1, 1, 1, 1, 1},
  };
  // Rational values: the tolerance only absorbs the last-bit rounding of
  // 2PR/(P+R) versus the reduced fraction.
  constexpr double tol = 1e-15;
  for (const auto& c : cases) {
    const auto r1 = rouge1(c.candidate, c.reference);
    const auto rl = rougeL(c.candidate, c.reference);
    const bool ok = near(r1.precision, c.r1_p, tol) && near(r1.recall, c.r1_r, tol) &&
                    near(r1.f1, c.r1_f, tol) && near(rl.precision, c.rl_p, tol) &&
                    near(rl.recall, c.rl_r, tol) && near(rl.f1, c.rl_f, tol);
    check.expect(ok, fmt::format("pair ('{}', '{}')", c.candidate, c.reference));
  }

  std::mt19937_64 rng(8);
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e"};
  std::uniform_int_distribution<int> len(0, 8), word(0, 4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> x, y;
    for (int i = len(rng); i > 0; --i) x.push_back(vocab[word(rng)]);
    for (int i = len(rng); i > 0; --i) y.push_back(vocab[word(rng)]);
    const auto want = oracle::lcs_brute_force(x, y);
    check.expect(lcs_length(x, y) == want, fmt::format("LCS trial {}", trial));
    std::string xs, ys;
    for (const auto& t : x) xs += t + " ";
    for (const auto& t : y) ys += t + " ";
    const auto got = rougeL(xs, ys);
    const double p = x.empty() ? 0 : double(want) / x.size();
    const double r = y.empty() ? 0 : double(want) / y.size();
    if (!x.empty() && !y.empty()) {
      check.expect(got.precision == p && got.recall == r, fmt::format("rougeL trial {}", trial));
    }
  }
  const double elapsed = seconds_since(start);
  check.expect(elapsed < 5.0, fmt::format("took {:.2f}s", elapsed));
}

// ---- AC2 -------------------------------------------------------------------

void confidence_property(Check& check) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_real_distribution<double> lp(-8.0, 0.0), bump(0.01, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> logprobs(static_cast<std::size_t>(len(rng)));
    for (auto& v : logprobs) v = lp(rng);
    if (trial % 10 == 0) logprobs.assign(logprobs.size(), 0.0);
    double sum = 0;
    for (const double v : logprobs) sum += v;
    const double want = std::exp(sum / static_cast<double>(logprobs.size()));
    const double got = confidence(logprobs);
    check.expect(near(got, want, 1e-12), fmt::format("trial {}: {} vs {}", trial, got, want));
    check.expect(got > 0.0 && got <= 1.0, fmt::format("trial {}: out of range {}", trial, got));

    // Raising one token's log-probability never lowers confidence; lowering
    // it strictly lowers it.
    auto up = logprobs, down = logprobs;
    const auto k = static_cast<std::size_t>(trial) % logprobs.size();
    up[k] = std::min(0.0, up[k] + bump(rng));
    down[k] -= bump(rng);
    check.expect(confidence(up) >= got, fmt::format("trial {}: not monotone up", trial));
    check.expect(confidence(down) < got, fmt::format("trial {}: not monotone down", trial));
  }
}

// ---- AC3 -------------------------------------------------------------------

void retrieval_rules(Check& check) {
  const auto start = Clock::now();
  const auto data = test::synthetic_retrieval_corpus(1);
  check.expect(data.corpus.size() == 50, "synthetic corpus size");
  for (const int shots : {1, 2}) {
    for (const auto space : {RetrievalSpace::Question, RetrievalSpace::FusedQuestionImage}) {
      for (const auto filter : {FilterMode::Filtered, FilterMode::Unfiltered}) {
        const RetrievalSpec spec{shots, space, filter};
        const auto label = fmt::format("{}s/{}/{}", shots, to_string(space), to_string(filter));
        for (const auto& query : data.corpus.instances()) {
          const auto got = select(data.corpus, data.store, query, spec);
          const auto want = oracle::select(data.corpus, data.store, query, spec);
          check.expect(got.example_ids == want.example_ids,
                       fmt::format("{} {}: oracle mismatch", label, query.instance_id));
          std::size_t unanswerable = 0;
          for (const auto& id : got.example_ids) {
            const auto& ex = data.corpus.get(id);
            check.expect(ex.image_id != query.image_id,
                         fmt::format("{} {}: shares image", label, query.instance_id));
            if (!ex.answerable()) ++unanswerable;
          }
          if (shots == 2) {
            check.expect(got.example_ids.size() == 2 && unanswerable == 1,
                         fmt::format("{} {}: {} unanswerable", label, query.instance_id, unanswerable));
          }
        }
      }
    }
  }

  // Planted tie: two candidates with the query's exact question vector.
  const auto& target = data.store.get(EmbeddingSpace::Question, "f0q1");
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < data.corpus.size(); ++i) {
    const auto& inst = data.corpus.at(i);
    if (inst.image_id != "fig0" && inst.split == Split::Train &&
        data.store.get(EmbeddingSpace::Question, inst.instance_id) == target) {
      tied.push_back(i);
    }
  }
  check.expect(tied.size() >= 2, "planted tie missing");
  if (tied.size() >= 2) {
    const auto sel = select(data.corpus, data.store, data.corpus.get("f0q1"),
                            RetrievalSpec{1, RetrievalSpace::Question, FilterMode::Unfiltered});
    check.expect(sel.example_ids == std::vector<std::string>{data.corpus.at(tied[0]).instance_id},
                 "tie not resolved to lowest corpus index");
  }
  const double elapsed = seconds_since(start);
  check.expect(elapsed < 10.0, fmt::format("took {:.2f}s", elapsed));
}

// ---- AC4 -------------------------------------------------------------------

void fusion_math(Check& check) {
  std::mt19937_64 rng(4);
  std::uniform_int_distribution<int> dim(2, 768);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto d = static_cast<std::size_t>(dim(rng));
    const auto q = test::random_unit(rng, d), i = test::random_unit(rng, d);
    std::vector<double> mean(d);
    double sq = 0;
    for (std::size_t k = 0; k < d; ++k) {
      mean[k] = (q[k] + i[k]) / 2;
      sq += mean[k] * mean[k];
    }
    const double n = std::sqrt(sq);
    const auto fused = fuse(q, i), swapped = fuse(i, q);
    double worst = 0, asym = 0;
    for (std::size_t k = 0; k < d; ++k) {
      worst = std::max(worst, std::fabs(fused[k] - mean[k] / n));
      asym = std::max(asym, std::fabs(fused[k] - swapped[k]));
    }
    check.expect(worst <= 1e-12, fmt::format("trial {}: deviation {}", trial, worst));
    check.expect(asym <= 1e-12, fmt::format("trial {}: asymmetry {}", trial, asym));
  }
}

// ---- AC5 -------------------------------------------------------------------

void prompt_goldens(Check& check) {
  const auto corpus = load_corpus(test::fixture_dir() / "prompt_instances.jsonl");
  check.expect(corpus.size() == 6, "expected 6 prompt fixtures");
  std::set<std::pair<bool, bool>> shapes;
  for (const auto& inst : corpus.instances()) {
    const auto want = test::read_file(test::golden_dir() / (inst.instance_id + ".txt"));
    const auto got = dump_text(render_bundle(inst, {}, corpus));
    check.expect(got == want, inst.instance_id + " differs from golden");
    check.expect(want.find(std::string(canonical_refusal())) != std::string::npos,
                 inst.instance_id + " lacks the refusal instruction");
    shapes.insert({!inst.answer_options.empty(), inst.figs_numb > 1});
  }
  check.expect(shapes.size() == 4, "fixtures do not cover MC/open x compound/single");
}

// ---- CLI helpers -------------------------------------------------------------

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(const fs::path& dir, std::vector<std::string> args) {
  args.insert(args.begin(), {"--project", (dir / "project.json").string()});
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kConfigs = {"internvl:1s_joint_f", "pixtral:2s_q_f",
                                           "pixtral:2s_q_img_f", "internvl:1s_q_f"};

// ---- AC6 -------------------------------------------------------------------

std::string expected_fallback(QuestionType type) {
  switch (type) {
    case QuestionType::BinaryVisual:
    case QuestionType::BinaryNonvisual: return "pixtral:2s_q_f";
    case QuestionType::InfiniteVisual:
    case QuestionType::InfiniteNonvisual: return "pixtral:2s_q_img_f";
    default: return "internvl:1s_q_f";
  }
}

void ensemble_routing(Check& check) {
  test::TempDir dir;
  test::copy_fixtures(dir.path());
  for (const auto& config : kConfigs) {
    const auto r = cli(dir.path(), {"run", "--config", config});
    check.expect(r.code == 0, config + ": " + r.err);
  }
  const auto corpus = load_corpus(dir / "corpus.jsonl");
  const auto caches = PredictionSet::load_directory(dir / "cache");
  const auto ids = corpus.ids();
  auto plan = std::get<ConfidencePlan>(load_plan("builtin:confidence"));

  const auto out = apply_confidence_plan(plan, caches, corpus, ids);
  std::size_t stage1 = 0, fallback = 0;
  for (const auto& a : out.answers) {
    const auto& inst = corpus.get(a.prediction.instance_id);
    const double conf = caches.get(inst.instance_id, "internvl:1s_joint_f").confidence;
    const std::string want = conf >= 0.9 ? "internvl:1s_joint_f" : expected_fallback(inst.question_type);
    check.expect(a.prediction.config_id == want,
                 fmt::format("{} routed to {}, expected {}", inst.instance_id, a.prediction.config_id, want));
    check.expect((a.stage == Stage::Stage1) == (conf >= 0.9), inst.instance_id + " wrong stage");
    (a.stage == Stage::Stage1 ? stage1 : fallback)++;
  }
  check.expect(stage1 > 0 && fallback > 0, "fixture should exercise both stages");
  const auto coverage = coverage_check(out, ids);
  check.expect(coverage.ok() && coverage.gaps.empty() && coverage.duplicates.empty(),
               "coverage reports gaps or duplicates");

  plan.threshold = 0.0;
  for (const auto& a : apply_confidence_plan(plan, caches, corpus, ids).answers) {
    check.expect(a.stage == Stage::Stage1, "threshold 0 must keep every stage-1 answer");
  }
  plan.threshold = 1.0 + 1e-9;
  for (const auto& a : apply_confidence_plan(plan, caches, corpus, ids).answers) {
    check.expect(a.stage == Stage::Fallback, "threshold > 1 must send everything to fallback");
  }
}

// ---- AC7 -------------------------------------------------------------------

void config_search(Check& check) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_rows(1, 12), n_cols(1, 3), folds(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> rows;
    for (int i = n_rows(rng); i > 0; --i) rows.push_back("r" + std::to_string(rows.size()));
    const std::vector<std::string> all_cols = {"cfg_c", "cfg_a", "cfg_b"};
    const std::vector<std::string> cols(all_cols.begin(), all_cols.begin() + n_cols(rng));
    const auto m = test::random_matrix(rng, rows, cols);
    SelectOptions o;
    o.folds = static_cast<std::size_t>(folds(rng));
    o.seed = rng();
    std::vector<std::vector<std::vector<std::size_t>>> partitions;
    for (std::size_t r = 0; r < o.max_repeats; ++r) {
      partitions.push_back(make_folds(m, rows, o.folds, mix_seed(o.seed + r)));
    }
    const auto got = select_best(m, rows, o);
    const auto want = oracle::select_best(m, partitions, o.min_repeats, o.stable_repeats);
    bool same = got.winner == want.winner && got.repeats == want.repeats;
    for (const auto& c : cols) same = same && near(got.scores.at(c), want.scores.at(c), 1e-12);
    check.expect(same, fmt::format("trial {}", trial));
  }

  const ScoreMatrix ab({"x", "y"}, {"A", "B"}, {0.8, 0.75, 0.6, 0.7});
  SelectOptions two;
  two.folds = 2;
  const std::vector<std::string> group = {"x", "y"};
  const auto sel = select_best(ab, group, two);
  check.expect(sel.winner == "B", "A/B example winner");
  check.expect(near(sel.scores.at("A"), -0.05, 1e-12) && near(sel.scores.at("B"), -0.025, 1e-12),
               fmt::format("A/B scores {} {}", sel.scores.at("A"), sel.scores.at("B")));

  const auto grouping = build_groups(test::reference_distribution_corpus());
  check.expect(grouping.groups.size() == 16, fmt::format("{} groups", grouping.groups.size()));
}

// ---- AC8 -------------------------------------------------------------------

// Runs the whole pipeline in a fresh directory and returns every artifact,
// keyed by name, with timestamps stripped and the directory masked.
std::map<std::string, std::string> pipeline(Check& check) {
  test::TempDir dir;
  test::copy_fixtures(dir.path());
  std::map<std::string, std::string> artifacts;
  const auto step = [&](const std::string& name, std::vector<std::string> args) {
    const auto r = cli(dir.path(), std::move(args));
    check.expect(r.code == 0, name + ": " + r.err);
    auto text = r.out;
    for (auto pos = text.find(dir.path().string()); pos != std::string::npos;
         pos = text.find(dir.path().string())) {
      text.replace(pos, dir.path().string().size(), "<dir>");
    }
    artifacts["stdout:" + name] = text;
  };
  step("ingest", {"ingest", "--out", (dir / "normalized.jsonl").string()});
  for (const auto& config : kConfigs) step("run " + config, {"run", "--config", config});
  step("ensemble", {"ensemble", "--out", (dir / "submission.jsonl").string(), "--predictions-out",
                    (dir / "ensemble_predictions.jsonl").string(), "--report",
                    (dir / "provenance.json").string()});
  step("evaluate", {"evaluate", "--predictions", (dir / "ensemble_predictions.jsonl").string(),
                    "--slice", "both", "--out", (dir / "evaluation.json").string()});
  step("calibrate", {"calibrate", "--config", "internvl:1s_joint_f", "--out",
                     (dir / "calibration.json").string()});

  for (const auto& entry : fs::recursive_directory_iterator(dir.path())) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), dir.path()).string();
    if (rel.find(".lock") != std::string::npos) continue;
    const auto text = test::read_file(entry.path());
    artifacts[rel] = entry.path().extension() == ".jsonl" ? test::strip_timestamps(text) : text;
  }
  return artifacts;
}

void end_to_end(Check& check) {
  const auto start = Clock::now();
  const auto first = pipeline(check);
  const auto second = pipeline(check);
  const double elapsed = seconds_since(start);
  check.expect(first.size() == second.size(), "different artifact sets");
  for (const auto& [name, text] : first) {
    const auto it = second.find(name);
    check.expect(it != second.end() && it->second == text, name + " differs between runs");
  }
  for (const char* name : {"submission.jsonl", "evaluation.json", "calibration.json",
                           "cache/internvl__1s_joint_f.jsonl"}) {
    check.expect(first.count(name) == 1, std::string(name) + " missing");
  }
  check.expect(elapsed < 60.0, fmt::format("two runs took {:.1f}s", elapsed));

  if (first.count("calibration.json")) {
    const auto cal = nlohmann::json::parse(first.at("calibration.json"));
    const std::vector<double> edges = {0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    const auto& bins = cal.at("bins");
    check.expect(bins.size() == 7, fmt::format("{} bins", bins.size()));
    double total = cal.at("below_range").at("fraction").get<double>() +
                   cal.at("above_range").at("fraction").get<double>();
    for (std::size_t b = 0; b < bins.size() && b < 7; ++b) {
      check.expect(near(bins[b].at("lower").get<double>(), edges[b], 1e-12) &&
                       near(bins[b].at("upper").get<double>(), edges[b + 1], 1e-12),
                   fmt::format("bin {} edges", b));
      total += bins[b].at("fraction").get<double>();
    }
    check.expect(near(total, 1.0, 1e-9), fmt::format("fractions sum to {}", total));
  }
}

// ---- AC9 -------------------------------------------------------------------

void unanswerable_precision_fixture(Check& check) {
  const auto corpus = load_corpus(test::fixture_dir() / "refusal_corpus.jsonl");
  std::vector<Prediction> preds;
  jsonl::for_each(test::fixture_dir() / "refusal_predictions.jsonl",
                  [&](const nlohmann::json& record, std::size_t) {
                    preds.push_back(prediction_from_json(record));
                  });
  std::size_t refusals = 0, correct = 0;
  for (const auto& p : preds) {
    if (!is_refusal(p)) continue;
    ++refusals;
    if (!corpus.get(p.instance_id).answerable()) ++correct;
  }
  check.expect(refusals == 10 && correct == 9,
               fmt::format("fixture has {} refusals, {} correct", refusals, correct));
  const double got = unanswerable_precision(preds, corpus);
  check.expect(got == 0.9, fmt::format("precision {}", got));

  std::vector<Prediction> answered;
  for (const auto& p : preds) {
    if (!is_refusal(p)) answered.push_back(p);
  }
  bool threw = false;
  try {
    unanswerable_precision(answered, corpus);
  } catch (const Error&) {
    threw = true;
  }
  check.expect(threw, "zero refusals must raise an error");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"AC1 ROUGE oracle suite", rouge_suite},
      {"AC2 confidence formula", confidence_property},
      {"AC3 retrieval determinism and rules", retrieval_rules},
      {"AC4 fusion math", fusion_math},
      {"AC5 prompt byte-exactness", prompt_goldens},
      {"AC6 ensemble routing", ensemble_routing},
      {"AC7 configuration search", config_search},
      {"AC8 end-to-end replay", end_to_end},
      {"AC9 unanswerable precision", unanswerable_precision_fixture},
  };
  int failures = 0;
  for (const auto& [name, body] : criteria) {
    Check check;
    try {
      body(check);
    } catch (const std::exception& e) {
      check.expect(false, std::string("exception: ") + e.what());
    }
    if (check.ok()) {
      std::cout << "[PASS] " << name << '\n';
    } else {
      std::cout << "[FAIL] " << name << ": " << check.summary() << '\n';
      ++failures;
    }
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
