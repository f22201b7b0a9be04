#include "support.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace figshot::test {

namespace fs = std::filesystem;

fs::path fixture_dir() { return FIGSHOT_FIXTURE_DIR; }
fs::path golden_dir() { return FIGSHOT_GOLDEN_DIR; }

TempDir::TempDir() {
  std::string pattern = (fs::temp_directory_path() / "figshot-test-XXXXXX").string();
  if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
  path_ = pattern;
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void copy_fixtures(const fs::path& dest) {
  fs::create_directories(dest);
  for (const auto& entry : fs::directory_iterator(fixture_dir())) {
    const auto name = entry.path().filename().string();
    if (name == "cache") continue;
    fs::copy(entry.path(), dest / name, fs::copy_options::recursive);
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

Instance make_instance(std::string id, std::string image_id, QuestionType type,
                       std::string figure_type, int figs_numb, Split split) {
  Instance instance;
  instance.instance_id = std::move(id);
  instance.image_id = std::move(image_id);
  instance.question = "question about " + instance.instance_id;
  instance.question_type = type;
  instance.figure_type = std::move(figure_type);
  instance.compound = figs_numb > 1;
  instance.figs_numb = figs_numb;
  instance.caption = "caption of " + instance.image_id;
  if (is_multiple_choice(type)) {
    instance.answer_options = {{"A", "one"}, {"B", "two"}, {"C", "three"}, {"D", "four"}};
    instance.gold_answer = "B";
  } else if (type == QuestionType::Unanswerable) {
    instance.gold_answer = "It is not possible to answer this question based only on the provided data.";
  } else {
    instance.gold_answer = "gold " + instance.instance_id;
  }
  instance.split = split;
  return instance;
}

Prediction make_pred(const std::string& instance_id, const std::string& config_id,
                     const std::string& answer, double confidence) {
  return make_prediction(instance_id, config_id, answer, {std::log(confidence)},
                         "2025-01-01T00:00:00Z");
}

Vector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Vector v(dim);
    double sq = 0.0;
    for (auto& x : v) {
      x = normal(rng);
      sq += x * x;
    }
    if (sq < 1e-6) continue;
    const double n = std::sqrt(sq);
    for (auto& x : v) x /= n;
    return v;
  }
}

SyntheticRetrieval synthetic_retrieval_corpus(std::uint64_t seed) {
  struct Figure {
    const char* type;
    int figs;
    Split split;
  };
  const Figure figures[10] = {
      {"line chart", 2, Split::Train},      {"line chart", 2, Split::Train},
      {"line chart", 1, Split::Train},      {"bar chart", 1, Split::Train},
      {"bar chart", 1, Split::Test},        {"bar chart", 3, Split::Train},
      {"pie chart", 1, Split::Train},       {"scatter plot", 1, Split::Train},
      {"scatter plot", 2, Split::Validation}, {"line chart", 1, Split::Validation},
  };
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> answerable_type(0, 5);
  std::uniform_int_distribution<int> slot(0, 4);

  std::vector<Instance> instances;
  for (int f = 0; f < 10; ++f) {
    const int unanswerable_slot = slot(rng);
    for (int q = 0; q < 5; ++q) {
      const auto type = q == unanswerable_slot ? QuestionType::Unanswerable
                                               : kAllQuestionTypes[answerable_type(rng)];
      instances.push_back(make_instance("f" + std::to_string(f) + "q" + std::to_string(q),
                                        "fig" + std::to_string(f), type, figures[f].type,
                                        figures[f].figs, figures[f].split));
    }
  }

  constexpr std::size_t dim = 6;
  std::vector<Vector> question(instances.size()), joint(instances.size()), image(10);
  for (auto& v : image) v = random_unit(rng, dim);
  for (std::size_t i = 0; i < instances.size(); ++i) {
    question[i] = random_unit(rng, dim);
    joint[i] = random_unit(rng, dim);
  }
  // Ties: figure 3 looks exactly like figure 1, and its first answerable and
  // its unanswerable question copy their counterparts on figure 1 in every
  // space. The second question on figure 0 matches the answerable pair.
  image[3] = image[1];
  const auto first_of = [&](int f, bool answerable) {
    for (int q = 0; q < 5; ++q) {
      if (instances[f * 5 + q].answerable() == answerable) return f * 5 + q;
    }
    return -1;
  };
  for (const bool answerable : {true, false}) {
    const auto from = first_of(1, answerable);
    const auto to = first_of(3, answerable);
    question[to] = question[from];
    joint[to] = joint[from];
  }
  question[1] = question[first_of(1, true)];

  SyntheticRetrieval out;
  out.corpus = Corpus(std::move(instances));
  for (std::size_t i = 0; i < out.corpus.size(); ++i) {
    const auto& instance = out.corpus.at(i);
    const auto fig = static_cast<std::size_t>(std::stoi(instance.image_id.substr(3)));
    out.store.add({instance.instance_id, EmbeddingSpace::Question, question[i]});
    out.store.add({instance.instance_id, EmbeddingSpace::Image, image[fig]});
    out.store.add({instance.instance_id, EmbeddingSpace::Joint, joint[i]});
  }
  return out;
}

Corpus reference_distribution_corpus() {
  const std::vector<std::pair<std::string, int>> counts = {
      {"line chart", 130},     {"tree", 10},           {"scatter plot", 12},
      {"pie chart", 6},        {"bar chart", 14},      {"architecture diagram", 8},
      {"neural networks", 6},  {"confusion matrix", 4}, {"graph", 5},
      {"venn diagram", 2},     {"box plot", 2},        {"histogram", 1},
  };
  std::vector<Instance> instances;
  int figure = 0;
  for (const auto& [type, n] : counts) {
    for (int i = 0; i < n; ++i, ++figure) {
      const auto image = "fig" + std::to_string(figure);
      for (const auto qtype : kAllQuestionTypes) {
        instances.push_back(make_instance(image + "_" + std::string(to_string(qtype)), image, qtype, type));
      }
    }
  }
  return Corpus(std::move(instances));
}

ScoreMatrix random_matrix(std::mt19937_64& rng, const std::vector<std::string>& rows,
                          const std::vector<std::string>& cols) {
  std::uniform_int_distribution<int> step(0, 20);
  std::vector<double> values(rows.size() * cols.size());
  for (auto& v : values) v = step(rng) / 20.0;
  return ScoreMatrix(rows, cols, std::move(values));
}

namespace {

void erase_key(nlohmann::json& value, const std::string& key) {
  if (value.is_object()) {
    value.erase(key);
    for (auto& item : value.items()) erase_key(item.value(), key);
  } else if (value.is_array()) {
    for (auto& item : value) erase_key(item, key);
  }
}

}  // namespace

std::string strip_timestamps(const std::string& jsonl_text) {
  std::istringstream in(jsonl_text);
  std::string line, out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto record = nlohmann::json::parse(line);
    erase_key(record, "created_at");
    out += record.dump() + "\n";
  }
  return out;
}

}  // namespace figshot::test
