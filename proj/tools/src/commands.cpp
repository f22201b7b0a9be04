#include "commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "figshot/configsearch.hpp"
#include "figshot/corpus.hpp"
#include "figshot/embed_client.hpp"
#include "figshot/embeddings.hpp"
#include "figshot/ensemble.hpp"
#include "figshot/error.hpp"
#include "figshot/inference.hpp"
#include "figshot/jsonl.hpp"
#include "figshot/metrics.hpp"
#include "figshot/prediction.hpp"
#include "figshot/prompting.hpp"
#include "figshot/report.hpp"
#include "figshot/retrieval.hpp"
#include "figshot/run_cache.hpp"
#include "figshot/score_matrix.hpp"
#include "project_config.hpp"

namespace figshot::cli {

namespace fs = std::filesystem;

namespace {

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string project_path = "figshot.json";
  std::optional<ProjectConfig> project;

  const ProjectConfig& config() {
    if (!project) project = ProjectConfig::load(project_path);
    return *project;
  }

  template <typename... Args>
  void log(fmt::format_string<Args...> format, Args&&... args) {
    err << "figshot: " << fmt::format(format, std::forward<Args>(args)...) << '\n';
  }
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Corpus load_corpora(const std::vector<fs::path>& paths,
                    const std::optional<std::vector<std::string>>& figure_types,
                    bool resolve_images = true) {
  LoadOptions options;
  options.figure_types = figure_types;
  std::vector<Instance> merged;
  for (const auto& path : paths) {
    const auto part = load_corpus(path, options);
    const auto base = fs::absolute(path).parent_path();
    for (auto instance : part.instances()) {
      // Image paths in a corpus file are relative to that file.
      if (resolve_images && !instance.image_path.empty() && fs::path(instance.image_path).is_relative()) {
        instance.image_path = (base / instance.image_path).lexically_normal().string();
      }
      merged.push_back(std::move(instance));
    }
  }
  return Corpus(std::move(merged));
}

std::set<Split> parse_splits(const std::string& text) {
  if (text == "dev") return kDevSplits;
  if (text == "all") return {Split::Train, Split::Validation, Split::Test};
  return {parse_split(text)};
}

struct Selection {
  std::string split = "dev";
  std::string instances;
  std::size_t limit = 0;

  void bind(CLI::App* cmd) {
    cmd->add_option("--split", split, "dev, train, validation, test or all")
        ->capture_default_str();
    cmd->add_option("--instances", instances, "Comma-separated instance ids (overrides --split)");
    cmd->add_option("--limit", limit, "Keep only the first N instances");
  }

  std::vector<std::string> ids(const Corpus& corpus) const {
    std::vector<std::string> out;
    if (!instances.empty()) {
      out = split_list(instances);
      for (const auto& id : out) corpus.get(id);
    } else {
      out = corpus.ids(parse_splits(split));
    }
    if (limit > 0 && out.size() > limit) out.resize(limit);
    if (out.empty()) throw Error(fmt::format("no instances selected (split '{}')", split));
    return out;
  }
};

/// Exclusive advisory lock on the cache directory for the lifetime of a run.
class CacheLock {
 public:
  explicit CacheLock(const fs::path& dir) {
    fs::create_directories(dir);
    const auto path = dir / ".figshot.lock";
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0) {
      throw Error(fmt::format("cannot open lock file {}: {}", path.string(), std::strerror(errno)));
    }
    if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
      ::close(fd_);
      throw Error(fmt::format("cache directory {} is locked by another run", dir.string()));
    }
  }
  ~CacheLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  CacheLock(const CacheLock&) = delete;
  CacheLock& operator=(const CacheLock&) = delete;

 private:
  int fd_ = -1;
};

std::unique_ptr<EmbeddingStore> load_store(const ProjectConfig& config, RetrievalSpace space) {
  const auto it = config.embeddings.find(space);
  if (it == config.embeddings.end()) return nullptr;
  auto store = std::make_unique<EmbeddingStore>();
  for (const auto& path : it->second) load_embeddings_into(*store, path);
  return store;
}

std::unique_ptr<EmbeddingStore> require_store(const ProjectConfig& config, const RetrievalSpec& spec) {
  if (spec.shots == 0) return nullptr;
  auto store = load_store(config, spec.space);
  if (!store) {
    throw Error(fmt::format("no '{}' embeddings configured; needed for {}-shot retrieval",
                            config_key(spec.space), spec.shots));
  }
  return store;
}

// Predictions from a JSONL file or from a configuration's cache entries.
struct PredictionSource {
  std::string predictions;
  std::string config;
  Selection selection;

  void bind(CLI::App* cmd) {
    auto* file = cmd->add_option("--predictions", predictions, "Predictions JSONL file");
    auto* cfg = cmd->add_option("--config", config, "Configuration id read from the cache");
    file->excludes(cfg);
    selection.bind(cmd);
  }

  std::vector<Prediction> load(Context& ctx, const Corpus& corpus) const {
    std::vector<Prediction> out;
    if (!predictions.empty()) {
      jsonl::for_each(predictions, [&](const nlohmann::json& record, std::size_t) {
        out.push_back(prediction_from_json(record));
      });
      return out;
    }
    if (config.empty()) throw Error("pass --predictions or --config");
    RunConfig::parse(config);
    const RunCache cache(ctx.config().cache_dir / cache_file_name(config));
    std::size_t missing = 0;
    for (const auto& id : selection.ids(corpus)) {
      if (const auto* p = cache.find(id, config)) {
        out.push_back(*p);
      } else {
        ++missing;
      }
    }
    if (missing > 0) ctx.log("{}: {} selected instances have no cached prediction", config, missing);
    if (out.empty()) throw Error(fmt::format("no cached predictions for {}", config));
    return out;
  }

  std::string label() const { return predictions.empty() ? config : predictions; }
};

void write_json(const std::string& path, const nlohmann::json& value) {
  if (!path.empty()) jsonl::write_text(path, value.dump(2) + "\n");
}

// ---- ingest ----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> corpus;
  std::string out;
};

int cmd_ingest(Context& ctx, const IngestArgs& args) {
  std::vector<fs::path> paths(args.corpus.begin(), args.corpus.end());
  std::optional<std::vector<std::string>> figure_types;
  if (paths.empty()) {
    paths = ctx.config().corpus;
    figure_types = ctx.config().figure_types;
  }
  const auto corpus = load_corpora(paths, figure_types, false);
  if (corpus.empty()) throw Error("corpus has no instances");

  std::map<std::string, std::size_t> by_question, by_figure, by_split;
  std::set<std::string> figures;
  for (const auto& instance : corpus.instances()) {
    ++by_question[std::string(to_string(instance.question_type))];
    ++by_figure[instance.figure_type];
    ++by_split[std::string(to_string(instance.split))];
    figures.insert(instance.image_id);
  }
  ctx.out << fmt::format("{} instances, {} question types\n", corpus.size(), by_question.size());
  ctx.out << fmt::format("{} figures, {} figure types\n", figures.size(), by_figure.size());
  ctx.out << "question types:\n";
  for (const auto type : kAllQuestionTypes) {
    const auto it = by_question.find(std::string(to_string(type)));
    ctx.out << fmt::format("  {:<20} {}\n", to_string(type), it == by_question.end() ? 0 : it->second);
  }
  ctx.out << "figure types:\n";
  for (const auto& [type, count] : by_figure) ctx.out << fmt::format("  {:<20} {}\n", type, count);
  ctx.out << "splits:\n";
  for (const auto& [split, count] : by_split) ctx.out << fmt::format("  {:<20} {}\n", split, count);
  if (!args.out.empty()) {
    write_corpus(args.out, corpus);
    ctx.log("wrote {} instances to {}", corpus.size(), args.out);
  }
  return 0;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string backend;
  Selection selection;
  bool force = false;
  std::size_t concurrency = 0;
  std::string report;
};

int cmd_run(Context& ctx, const RunArgs& args) {
  const auto& project = ctx.config();
  const auto config = RunConfig::parse(args.config);
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto ids = args.selection.ids(corpus);
  const auto store = require_store(project, config.spec);

  const auto backend_name = args.backend.empty() ? config.backend : args.backend;
  auto backend = project.backends.create(backend_name);

  CacheLock lock(project.cache_dir);
  RunCache cache(project.cache_dir / cache_file_name(config.id()));
  RunOptions options;
  options.concurrency = args.concurrency > 0 ? args.concurrency : project.concurrency;
  options.force = args.force;
  options.decode = project.decode;
  options.retry = project.retry_policy();

  ctx.log("running {} on {} instances with backend '{}'", config.id(), ids.size(), backend_name);
  const auto report = run_config(corpus, store.get(), config, ids, cache, *backend, options);

  const fs::path report_path =
      args.report.empty()
          ? project.cache_dir / "reports" / (fs::path(cache_file_name(config.id())).stem().string() + ".json")
          : fs::path(args.report);
  jsonl::write_text(report_path, to_json(report).dump(2) + "\n");

  ctx.out << fmt::format("{}: requested {}, cached {}, new {}, failed {}\n", report.config_id,
                         report.requested, report.skipped_cached, report.predictions.size(),
                         report.failures.size());
  for (const auto& failure : report.failures) {
    ctx.log("{} failed: {}", failure.instance_id, failure.message);
  }
  return report.ok() ? 0 : 1;
}

// ---- ensemble --------------------------------------------------------------

struct EnsembleArgs {
  std::string plan = "builtin:confidence";
  std::optional<double> threshold;
  Selection selection;
  std::string out;
  std::string predictions_out;
  std::string report;
};

EnsemblePlan resolve_plan(Context& ctx, const std::string& source) {
  if (source.rfind("builtin:", 0) == 0) return load_plan(source);
  if (ctx.project || fs::exists(ctx.project_path)) {
    const auto& plans = ctx.config().plans;
    if (const auto it = plans.find(source); it != plans.end()) return load_plan(it->second.string());
  }
  return load_plan(source);
}

int cmd_ensemble(Context& ctx, const EnsembleArgs& args) {
  const auto& project = ctx.config();
  auto plan = resolve_plan(ctx, args.plan);
  if (args.threshold) {
    auto* confidence = std::get_if<ConfidencePlan>(&plan);
    if (!confidence) throw Error("--threshold only applies to confidence plans");
    confidence->threshold = *args.threshold;
  }
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto ids = args.selection.ids(corpus);
  const auto caches = PredictionSet::load_directory(project.cache_dir);
  const auto output = apply_plan(plan, caches, corpus, ids);
  const auto coverage = coverage_check(output, ids);

  write_submission(args.out, output);
  if (!args.predictions_out.empty()) {
    std::vector<nlohmann::json> lines;
    for (const auto& p : output.predictions()) lines.push_back(to_json(p));
    jsonl::write_all(args.predictions_out, lines);
  }
  auto provenance = provenance_json(output);
  provenance["coverage"] = to_json(coverage);
  provenance["plan"] = std::visit([](const auto& p) { return to_json(p); }, plan);
  write_json(args.report, provenance);

  ctx.out << fmt::format("{} answers written to {}\n", output.answers.size(), args.out);
  for (const auto& [stage, count] : output.counts_by_stage()) {
    ctx.out << fmt::format("  stage {:<10} {}\n", stage, count);
  }
  for (const auto& [config, count] : output.counts_by_config()) {
    ctx.out << fmt::format("  config {:<24} {}\n", config, count);
  }
  if (!coverage.ok()) {
    ctx.log("coverage check failed: {}", to_json(coverage).dump());
    return 1;
  }
  return 0;
}

// ---- evaluate / calibrate --------------------------------------------------

struct EvaluateArgs {
  PredictionSource source;
  std::string slice = "question_type";
  std::string bertscore;
  std::string out;
};

int cmd_evaluate(Context& ctx, const EvaluateArgs& args) {
  const auto& project = ctx.config();
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto predictions = args.source.load(ctx, corpus);
  const auto slice_by = parse_slice_by(args.slice);

  std::optional<BertScores> bert;
  if (!args.bertscore.empty()) bert = load_bertscores(args.bertscore);
  const auto* bert_ptr = bert ? &*bert : nullptr;
  const auto overall = aggregate(predictions, corpus, SliceBy::None, bert_ptr);
  const auto slices = aggregate(predictions, corpus, slice_by, bert_ptr);

  nlohmann::json report = {{"predictions", predictions.size()},
                           {"slice_by", args.slice},
                           {"overall", to_json(overall)},
                           {"slices", to_json(slices)}};
  try {
    report["unanswerable_precision"] = unanswerable_precision(predictions, corpus);
  } catch (const Error&) {
    report["unanswerable_precision"] = nullptr;
  }
  write_json(args.out, report);

  ctx.out << format_table(overall, "overall");
  if (slice_by != SliceBy::None) ctx.out << format_table(slices, args.slice);
  if (report["unanswerable_precision"].is_number()) {
    ctx.out << fmt::format("unanswerable precision: {:.1f}\n",
                           100.0 * report["unanswerable_precision"].get<double>());
  } else {
    ctx.out << "unanswerable precision: undefined (no refusals)\n";
  }
  return 0;
}

struct CalibrateArgs {
  PredictionSource source;
  std::string edges;
  std::string out;
};

int cmd_calibrate(Context& ctx, const CalibrateArgs& args) {
  const auto& project = ctx.config();
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto predictions = args.source.load(ctx, corpus);
  std::vector<double> edges = kDefaultCalibrationEdges;
  if (!args.edges.empty()) {
    edges.clear();
    for (const auto& item : split_list(args.edges)) {
      try {
        edges.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw Error(fmt::format("bad calibration edge '{}'", item));
      }
    }
  }
  const auto report = calibration(predictions, corpus, edges);
  auto json = to_json(report);
  json["source"] = args.source.label();
  write_json(args.out, json);
  ctx.out << format_table(report);
  return 0;
}

// ---- select-config ---------------------------------------------------------

struct SelectArgs {
  std::string matrix;
  std::string configs;
  Selection selection;
  std::uint64_t seed = 0;
  std::size_t folds = 5;
  std::size_t min_repeats = 10;
  std::size_t max_repeats = 50;
  double others_threshold = 0.02;
  std::string split_type = "line chart";
  std::string out;
  std::string diagnostics;
  std::string export_matrix;
};

int cmd_select_config(Context& ctx, const SelectArgs& args) {
  const auto& project = ctx.config();
  const auto corpus = load_corpora(project.corpus, project.figure_types);

  ScoreMatrix matrix;
  if (!args.matrix.empty()) {
    matrix = ScoreMatrix::read_csv(args.matrix);
  } else {
    const auto caches = PredictionSet::load_directory(project.cache_dir);
    auto configs = args.configs.empty() ? caches.config_ids() : split_list(args.configs);
    if (configs.empty()) throw Error("no cached configurations to select from");
    for (const auto& id : configs) RunConfig::parse(id);
    const auto ids = args.selection.ids(corpus);
    matrix = ScoreMatrix::from_predictions(caches, corpus, ids, configs);
  }
  if (!args.export_matrix.empty()) matrix.write_csv(args.export_matrix);

  std::vector<Instance> rows;
  rows.reserve(matrix.rows().size());
  for (const auto& instance : corpus.instances()) {
    if (matrix.row_index(instance.instance_id)) rows.push_back(instance);
  }
  if (rows.size() != matrix.rows().size()) {
    for (const auto& id : matrix.rows()) {
      if (!corpus.find(id)) throw Error(fmt::format("matrix row '{}' is not in the corpus", id));
    }
  }
  const Corpus scored(std::move(rows));

  SelectOptions select;
  select.seed = args.seed;
  select.folds = args.folds;
  select.min_repeats = args.min_repeats;
  select.max_repeats = args.max_repeats;
  GroupingOptions grouping;
  grouping.others_threshold = args.others_threshold;
  grouping.split_type = args.split_type;

  const auto search = build_type_table(matrix, scored, select, grouping);
  jsonl::write_text(args.out, to_json(search.plan).dump(2) + "\n");
  write_json(args.diagnostics, search.diagnostics());

  ctx.out << fmt::format("{} groups over {} instances and {} configurations (seed {})\n",
                         search.selections.size(), matrix.rows().size(), matrix.cols().size(),
                         args.seed);
  for (const auto& [group, selection] : search.selections) {
    ctx.out << fmt::format("  {:<32} {:<24} {:>9.5f}  repeats {}\n", group, selection.winner,
                           selection.scores.at(selection.winner), selection.repeats);
  }
  return 0;
}

// ---- retrieve / render / fetch-embeddings ----------------------------------

struct RetrieveArgs {
  std::string spec;
  Selection selection;
  std::string out;
};

int cmd_retrieve(Context& ctx, const RetrieveArgs& args) {
  const auto& project = ctx.config();
  const auto spec = parse_spec_token(args.spec);
  if (spec.shots == 0) throw Error("zero-shot specs retrieve nothing");
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto store = require_store(project, spec);
  std::vector<SelectionRecord> records;
  for (const auto& id : args.selection.ids(corpus)) {
    records.push_back({id, select(corpus, *store, corpus.get(id), spec)});
  }
  if (!args.out.empty()) export_selections(args.out, records, spec);
  ctx.out << fmt::format("{} selections for {}\n", records.size(), args.spec);
  if (spec.shots == 1) {
    for (const auto& [type, rate] : match_rate(records, corpus)) {
      ctx.out << fmt::format("  {:<20} {:5.1f}% same question type\n", to_string(type), 100.0 * rate);
    }
  }
  return 0;
}

struct RenderArgs {
  std::string config;
  std::string instance;
};

int cmd_render(Context& ctx, const RenderArgs& args) {
  const auto& project = ctx.config();
  const auto config = RunConfig::parse(args.config);
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  const auto& query = corpus.get(args.instance);
  const auto store = require_store(project, config.spec);
  FewShotSelection selection;
  if (config.spec.shots > 0) selection = select(corpus, *store, query, config.spec);
  ctx.out << dump_text(render_bundle(query, selection, corpus));
  return 0;
}

struct FetchArgs {
  std::string endpoint;
  std::string space;
  Selection selection;
  std::string out;
  std::size_t batch_size = 32;
  std::size_t concurrency = 4;
};

int cmd_fetch_embeddings(Context& ctx, const FetchArgs& args) {
  const auto& project = ctx.config();
  const auto endpoint = args.endpoint.empty() ? project.embed_service : args.endpoint;
  if (endpoint.empty()) throw Error("no embedding service: pass --endpoint or set embed_service");
  const auto space = parse_embedding_space(args.space);
  const auto corpus = load_corpora(project.corpus, project.figure_types);
  std::vector<Instance> instances;
  for (const auto& id : args.selection.ids(corpus)) {
    instances.push_back(corpus.get(id));
  }
  EmbedClientOptions options;
  options.batch_size = args.batch_size;
  options.concurrency = args.concurrency;
  const auto records = fetch_embeddings(endpoint, instances, space, options);
  write_embeddings(args.out, records);
  ctx.out << fmt::format("{} {} embeddings written to {}\n", records.size(), args.space, args.out);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Context ctx{out, err, "figshot.json", std::nullopt};
  CLI::App app{"Few-shot multimodal figure question answering pipeline", "figshot"};
  app.require_subcommand(1);
  app.add_option("--project", ctx.project_path, "Project configuration file")->capture_default_str();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate corpora and print their distribution");
  ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus JSONL file(s); default: project corpus");
  ingest_cmd->add_option("--out", ingest.out, "Write the merged, normalized corpus here");

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run one configuration and append to its cache");
  run_cmd->add_option("--config", run_args.config, "Configuration id, e.g. internvl:1s_q_f")->required();
  run_cmd->add_option("--backend", run_args.backend, "Backend name (default: from the config id)");
  run_args.selection.bind(run_cmd);
  run_cmd->add_flag("--force", run_args.force, "Re-run cached instances");
  run_cmd->add_option("--concurrency", run_args.concurrency, "Requests in flight");
  run_cmd->add_option("--report", run_args.report, "Failure report path");

  EnsembleArgs ensemble;
  auto* ensemble_cmd = app.add_subcommand("ensemble", "Apply a routing plan to cached predictions");
  ensemble_cmd->add_option("--plan", ensemble.plan, "Plan file, project plan name or builtin:*")
      ->capture_default_str();
  ensemble_cmd->add_option("--threshold", ensemble.threshold, "Override the confidence threshold");
  ensemble.selection.bind(ensemble_cmd);
  ensemble_cmd->add_option("--out", ensemble.out, "Submission JSONL")->required();
  ensemble_cmd->add_option("--predictions-out", ensemble.predictions_out,
                           "Selected predictions as JSONL");
  ensemble_cmd->add_option("--report", ensemble.report, "Provenance and coverage report (JSON)");

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "ROUGE scores, optionally sliced");
  evaluate.source.bind(evaluate_cmd);
  evaluate_cmd->add_option("--slice", evaluate.slice, "none, question_type, figure_type or both")
      ->capture_default_str();
  evaluate_cmd->add_option("--bertscore", evaluate.bertscore, "JSON of external BERTScore F1");
  evaluate_cmd->add_option("--out", evaluate.out, "JSON report");

  CalibrateArgs calibrate;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "ROUGE-1 F1 per confidence bin");
  calibrate.source.bind(calibrate_cmd);
  calibrate_cmd->add_option("--edges", calibrate.edges, "Comma-separated bin edges");
  calibrate_cmd->add_option("--out", calibrate.out, "JSON report");

  SelectArgs select_args;
  auto* select_cmd =
      app.add_subcommand("select-config", "Pick a configuration per figure/question-type group");
  auto* matrix_opt = select_cmd->add_option("--matrix", select_args.matrix, "Score matrix CSV");
  select_cmd->add_option("--configs", select_args.configs, "Configurations read from the caches")
      ->excludes(matrix_opt);
  select_args.selection.bind(select_cmd);
  select_cmd->add_option("--seed", select_args.seed, "Seed for fold assignment")->capture_default_str();
  select_cmd->add_option("--folds", select_args.folds)->capture_default_str();
  select_cmd->add_option("--min-repeats", select_args.min_repeats)->capture_default_str();
  select_cmd->add_option("--max-repeats", select_args.max_repeats)->capture_default_str();
  select_cmd->add_option("--others-threshold", select_args.others_threshold)->capture_default_str();
  select_cmd->add_option("--split-type", select_args.split_type)->capture_default_str();
  select_cmd->add_option("--out", select_args.out, "Type-table plan (JSON)")->required();
  select_cmd->add_option("--diagnostics", select_args.diagnostics, "Per-group scores (JSON)");
  select_cmd->add_option("--export-matrix", select_args.export_matrix, "Write the score matrix CSV");

  RetrieveArgs retrieve;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Export few-shot selections");
  retrieve_cmd->add_option("--spec", retrieve.spec, "Spec token, e.g. 1s_q_f")->required();
  retrieve.selection.bind(retrieve_cmd);
  retrieve_cmd->add_option("--out", retrieve.out, "Selections JSONL");

  RenderArgs render;
  auto* render_cmd = app.add_subcommand("render", "Print the prompt for one instance");
  render_cmd->add_option("--config", render.config)->required();
  render_cmd->add_option("--instance", render.instance)->required();

  FetchArgs fetch;
  auto* fetch_cmd =
      app.add_subcommand("fetch-embeddings", "Request embeddings from the embedding service");
  fetch_cmd->add_option("--endpoint", fetch.endpoint, "Service URL (default: project embed_service)");
  fetch_cmd->add_option("--space", fetch.space, "question, image or joint")->required();
  fetch.selection.bind(fetch_cmd);
  fetch_cmd->add_option("--out", fetch.out, "Embeddings JSONL")->required();
  fetch_cmd->add_option("--batch-size", fetch.batch_size)->capture_default_str();
  fetch_cmd->add_option("--concurrency", fetch.concurrency)->capture_default_str();

  std::vector<const char*> argv{"figshot"};
  for (const auto& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ctx, ingest);
    if (*run_cmd) return cmd_run(ctx, run_args);
    if (*ensemble_cmd) return cmd_ensemble(ctx, ensemble);
    if (*evaluate_cmd) return cmd_evaluate(ctx, evaluate);
    if (*calibrate_cmd) return cmd_calibrate(ctx, calibrate);
    if (*select_cmd) return cmd_select_config(ctx, select_args);
    if (*retrieve_cmd) return cmd_retrieve(ctx, retrieve);
    if (*render_cmd) return cmd_render(ctx, render);
    if (*fetch_cmd) return cmd_fetch_embeddings(ctx, fetch);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace figshot::cli
