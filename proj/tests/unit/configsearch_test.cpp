#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "figshot/configsearch.hpp"
#include "figshot/error.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace figshot;
using test::make_instance;

namespace {

std::vector<std::string> names(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

ScoreMatrix constant_matrix(const std::vector<std::string>& rows,
                            const std::vector<std::string>& cols, double value) {
  return ScoreMatrix(rows, cols, std::vector<double>(rows.size() * cols.size(), value));
}

// The partitions select_best draws, recomputed from the documented seeds.
std::vector<std::vector<std::vector<std::size_t>>> partitions(const ScoreMatrix& m,
                                                              const std::vector<std::string>& group,
                                                              const SelectOptions& o) {
  std::vector<std::vector<std::vector<std::size_t>>> out;
  for (std::size_t r = 0; r < o.max_repeats; ++r) {
    out.push_back(make_folds(m, group, o.folds, mix_seed(o.seed + r)));
  }
  return out;
}

}  // namespace

TEST(BuildGroups, ReferenceDistributionGivesSixteenGroups) {
  const auto corpus = test::reference_distribution_corpus();
  const auto plan = build_groups(corpus);
  EXPECT_EQ(plan.groups.size(), 16u);
  EXPECT_EQ(plan.split_type, "line chart");
  EXPECT_EQ(plan.homogeneous_types.size(), 8u);
  // venn diagram and box plot are at 1%, histogram at 0.5%; graph is 2.5%.
  EXPECT_EQ(plan.merged_types, (std::set<std::string>{"box plot", "histogram", "venn diagram"}));
  EXPECT_EQ(plan.groups.at("others").size(), 5u * 7u);
  EXPECT_EQ(plan.groups.at("line chart/unanswerable").size(), 130u);

  std::set<std::string> seen;
  std::size_t total = 0;
  for (const auto& [name, ids] : plan.groups) {
    total += ids.size();
    seen.insert(ids.begin(), ids.end());
  }
  EXPECT_EQ(total, corpus.size());
  EXPECT_EQ(seen.size(), corpus.size());
}

TEST(BuildGroups, SingleTypeSplitsByQuestionType) {
  std::vector<Instance> instances;
  for (const auto type : kAllQuestionTypes) {
    instances.push_back(make_instance(std::string(to_string(type)), "f", type, "tree"));
  }
  const auto plan = build_groups(Corpus(instances));
  EXPECT_EQ(plan.split_type, "tree");
  EXPECT_EQ(plan.groups.size(), 7u);
  EXPECT_TRUE(plan.groups.contains("tree/mc4_visual"));
}

TEST(BuildGroups, ExactlyTwoPercentIsKept) {
  std::vector<Instance> instances;
  for (int f = 0; f < 50; ++f) {
    const auto type = f == 0 ? "pie chart" : (f < 25 ? "line chart" : "bar chart");
    instances.push_back(make_instance("i" + std::to_string(f), "f" + std::to_string(f),
                                      QuestionType::BinaryVisual, type));
  }
  const auto plan = build_groups(Corpus(instances));
  EXPECT_TRUE(plan.homogeneous_types.contains("pie chart"));
  EXPECT_TRUE(plan.merged_types.empty());
  GroupingOptions strict;
  strict.others_threshold = 0.021;
  EXPECT_TRUE(build_groups(Corpus(instances), strict).merged_types.contains("pie chart"));
}

TEST(BuildGroups, SharesCountFiguresNotQuestions) {
  // One pie-chart figure carrying many questions still counts once.
  std::vector<Instance> instances;
  for (int f = 0; f < 99; ++f) {
    instances.push_back(make_instance("l" + std::to_string(f), "lf" + std::to_string(f),
                                      QuestionType::BinaryVisual, "line chart"));
  }
  for (int q = 0; q < 40; ++q) {
    instances.push_back(make_instance("p" + std::to_string(q), "pie", QuestionType::BinaryVisual,
                                      "pie chart"));
  }
  EXPECT_TRUE(build_groups(Corpus(instances)).merged_types.contains("pie chart"));
}

TEST(MakeFolds, PartitionsIntoNearEqualFolds) {
  const auto rows = names("r", 10);
  const auto m = constant_matrix(rows, {"a"}, 0.5);
  const auto folds = make_folds(m, rows, 5, 42);
  ASSERT_EQ(folds.size(), 5u);
  std::set<std::size_t> seen;
  for (const auto& f : folds) {
    EXPECT_EQ(f.size(), 2u);
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(make_folds(m, rows, 5, 42), folds);
  EXPECT_NE(make_folds(m, rows, 5, 43), folds);

  const auto uneven = make_folds(m, names("r", 7), 5, 1);
  std::vector<std::size_t> sizes;
  for (const auto& f : uneven) sizes.push_back(f.size());
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{1, 1, 1, 2, 2}));

  const auto small = make_folds(m, names("r", 3), 5, 1);
  ASSERT_EQ(small.size(), 1u);
  EXPECT_EQ(small[0].size(), 3u);
  const std::vector<std::string> ghost = {"nope"};
  EXPECT_THROW(make_folds(m, ghost, 5, 1), Error);
}

TEST(MakeFolds, ShuffleIsRoughlyUniform) {
  // Position of row 0 after shuffling 4 rows into 4 singleton folds.
  const auto rows = names("r", 4);
  const auto m = constant_matrix(rows, {"a"}, 0.5);
  std::vector<int> hits(4, 0);
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const auto folds = make_folds(m, rows, 4, mix_seed(s));
    for (std::size_t f = 0; f < 4; ++f) hits[f] += folds[f][0] == 0;
  }
  for (const int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(FoldScores, ConstantMatrix) {
  const auto rows = names("r", 10);
  const auto m = constant_matrix(rows, {"a", "b", "c"}, 0.7);
  const auto scores = fold_scores(m, rows, 5, 9);
  for (const auto& fold : scores.means) {
    for (const double v : fold) EXPECT_NEAR(v, 0.7, 1e-15);
  }
}

TEST(FoldScores, MatchIndependentMeans) {
  std::mt19937_64 rng(11);
  const auto rows = names("r", 20);
  const auto m = test::random_matrix(rng, rows, {"a", "b"});
  const auto scores = fold_scores(m, rows, 5, 123);
  for (std::size_t f = 0; f < scores.folds.size(); ++f) {
    for (std::size_t c = 0; c < 2; ++c) {
      long double sum = 0;
      for (const auto r : scores.folds[f]) sum += m.at(r, c);
      EXPECT_NEAR(scores.means[f][c], static_cast<double>(sum / scores.folds[f].size()), 1e-15);
    }
  }
}

TEST(SelectBest, WorkedTwoFoldExample) {
  // Two instances, two folds: fold means are A [0.8, 0.6], B [0.75, 0.7]
  // whichever way the shuffle goes.
  const ScoreMatrix m({"x", "y"}, {"A", "B"}, {0.8, 0.75, 0.6, 0.7});
  const std::vector<std::string> group = {"x", "y"};
  SelectOptions o;
  o.folds = 2;
  const auto sel = select_best(m, group, o);
  EXPECT_EQ(sel.winner, "B");
  EXPECT_NEAR(sel.scores.at("A"), -0.05, 1e-12);
  EXPECT_NEAR(sel.scores.at("B"), -0.025, 1e-12);
  EXPECT_EQ(sel.repeats, 10u);
  EXPECT_EQ(sel.seeds.size(), 10u);
}

TEST(SelectBest, SingleConfigScoresZero) {
  const auto rows = names("r", 8);
  std::mt19937_64 rng(1);
  const auto m = test::random_matrix(rng, rows, {"only"});
  const auto sel = select_best(m, rows);
  EXPECT_EQ(sel.winner, "only");
  EXPECT_EQ(sel.scores.at("only"), 0.0);
}

TEST(SelectBest, DominatingConfigScoresZero) {
  const auto rows = names("r", 12);
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.insert(values.end(), {0.2, 0.9, 0.5});
  }
  const ScoreMatrix m(rows, {"a", "b", "c"}, values);
  const auto sel = select_best(m, rows);
  EXPECT_EQ(sel.winner, "b");
  EXPECT_EQ(sel.scores.at("b"), 0.0);
  for (const auto& [cfg, score] : sel.scores) EXPECT_LE(score, 0.0) << cfg;
}

TEST(SelectBest, TieGoesToSmallestId) {
  const auto rows = names("r", 6);
  const auto m = constant_matrix(rows, {"zeta", "alpha", "mid"}, 0.4);
  EXPECT_EQ(select_best(m, rows).winner, "alpha");
}

TEST(SelectBest, StopsOnceStableAfterMinimum) {
  const auto rows = names("r", 10);
  std::mt19937_64 rng(2);
  const auto m = test::random_matrix(rng, rows, {"a", "b", "c"});
  SelectOptions o;
  o.min_repeats = 4;
  o.stable_repeats = 2;
  o.max_repeats = 7;
  const auto sel = select_best(m, rows, o);
  EXPECT_GE(sel.repeats, 4u);
  EXPECT_LE(sel.repeats, 7u);
  EXPECT_EQ(sel.winner_history.size(), sel.repeats);
  if (sel.repeats < 7) {
    EXPECT_EQ(sel.winner_history[sel.repeats - 1], sel.winner_history[sel.repeats - 2]);
  }
}

TEST(SelectBest, Errors) {
  const auto rows = names("r", 3);
  const ScoreMatrix no_cols(rows, {}, {});
  EXPECT_THROW(select_best(no_cols, rows), Error);
  const auto m = constant_matrix(rows, {"a"}, 0.1);
  EXPECT_THROW(select_best(m, std::vector<std::string>{}), Error);
}

TEST(SelectBest, MatchesOracleOnRandomMatrices) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> n_rows(1, 12), n_cols(1, 3), folds(2, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto rows = names("r", static_cast<std::size_t>(n_rows(rng)));
    const std::vector<std::string> all_cols = {"cfg_b", "cfg_a", "cfg_c"};
    const std::vector<std::string> cols(all_cols.begin(), all_cols.begin() + n_cols(rng));
    const auto m = test::random_matrix(rng, rows, cols);
    SelectOptions o;
    o.folds = static_cast<std::size_t>(folds(rng));
    o.seed = rng();
    o.max_repeats = 30;
    const auto got = select_best(m, rows, o);
    const auto want = oracle::select_best(m, partitions(m, rows, o), o.min_repeats, o.stable_repeats);
    ASSERT_EQ(got.winner, want.winner) << "trial " << trial;
    EXPECT_EQ(got.repeats, want.repeats);
    for (const auto& c : cols) EXPECT_NEAR(got.scores.at(c), want.scores.at(c), 1e-12);
  }
}

TEST(SelectBest, DeltasIgnoreFoldWideShift) {
  // Adding a constant to every config of one row shifts the fold means
  // equally and leaves the max-relative deltas intact.
  const auto rows = names("r", 10);
  std::vector<double> base, shifted;
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> step(0, 10);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double a = step(rng) / 20.0, b = step(rng) / 20.0;
    base.insert(base.end(), {a, b});
    const double c = r % 3 == 0 ? 0.25 : 0.0;
    shifted.insert(shifted.end(), {a + c, b + c});
  }
  const auto s1 = select_best(ScoreMatrix(rows, {"a", "b"}, base), rows);
  const auto s2 = select_best(ScoreMatrix(rows, {"a", "b"}, shifted), rows);
  for (const auto* c : {"a", "b"}) EXPECT_NEAR(s1.scores.at(c), s2.scores.at(c), 1e-12);
}

TEST(BuildTypeTable, UniformlyBestConfigEverywhere) {
  const auto corpus = test::reference_distribution_corpus();
  const auto rows = corpus.ids();
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) values.insert(values.end(), {0.3, 0.6, 0.1});
  const ScoreMatrix m(rows, {"x:0s", "y:0s", "z:0s"}, values);
  SelectOptions o;
  o.max_repeats = 10;
  const auto search = build_type_table(m, corpus, o);
  EXPECT_EQ(search.selections.size(), 16u);
  for (const auto& [group, routing] : search.plan.table) {
    for (const auto& [type, cfg] : routing) EXPECT_EQ(cfg, "y:0s") << group;
  }
  EXPECT_EQ(search.plan.default_group, "others");
  EXPECT_EQ(search.diagnostics().at("group_count"), 16);
}

TEST(BuildTypeTable, SplitTypeRowsDifferPerQuestionType) {
  std::vector<Instance> instances;
  for (int f = 0; f < 12; ++f) {
    const auto image = "fig" + std::to_string(f);
    const auto type = f < 8 ? "line chart" : "tree";
    for (const auto qt : kAllQuestionTypes) {
      instances.push_back(make_instance(image + std::string(to_string(qt)), image, qt, type));
    }
  }
  const Corpus corpus(instances);
  std::vector<double> values;
  for (const auto& inst : corpus.instances()) {
    const bool binary = inst.question_type == QuestionType::BinaryVisual ||
                        inst.question_type == QuestionType::BinaryNonvisual;
    const bool mc = is_multiple_choice(inst.question_type);
    // X wins binary line-chart groups, Y wins multiple choice, Z the rest.
    values.insert(values.end(), {binary ? 0.9 : 0.1, mc ? 0.9 : 0.1, (binary || mc) ? 0.2 : 0.5});
  }
  const ScoreMatrix m(corpus.ids(), {"x:0s", "y:0s", "z:0s"}, values);
  const auto search = build_type_table(m, corpus);
  const auto& line = search.plan.table.at("line chart");
  EXPECT_EQ(line.at(QuestionType::BinaryVisual), "x:0s");
  EXPECT_EQ(line.at(QuestionType::BinaryNonvisual), "x:0s");
  EXPECT_EQ(line.at(QuestionType::Mc4Visual), "y:0s");
  EXPECT_EQ(line.at(QuestionType::Mc4Nonvisual), "y:0s");
  EXPECT_EQ(line.at(QuestionType::InfiniteVisual), "z:0s");

  // Each split-group winner agrees with the brute-force recomputation.
  for (const auto type : {QuestionType::BinaryVisual, QuestionType::Mc4Visual}) {
    const auto name = split_group_name("line chart", type);
    const auto& ids = search.grouping.groups.at(name);
    SelectOptions o;
    o.seed = 0;
    const auto& sel = search.selections.at(name);
    std::vector<std::vector<std::vector<std::size_t>>> parts;
    for (const auto seed : sel.seeds) parts.push_back(make_folds(m, ids, o.folds, seed));
    EXPECT_EQ(oracle::select_best(m, parts, o.min_repeats, o.stable_repeats).winner, sel.winner);
  }
  // Tree is homogeneous (4 of 12 figures); "others" is added for unseen types.
  EXPECT_TRUE(search.plan.table.contains("tree"));
  EXPECT_TRUE(search.plan.table.contains("others"));
}

TEST(BuildTypeTable, MissingRowIsAnError) {
  const Corpus corpus({make_instance("a", "f", QuestionType::BinaryVisual)});
  const ScoreMatrix m({"b"}, {"x:0s"}, {0.5});
  EXPECT_THROW(build_type_table(m, corpus), Error);
}
