#include "cli.hpp"

#include <array>
#include <fstream>
#include <optional>
#include <ostream>

#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "app_config.hpp"
#include "json.hpp"
#include "vmmr/baseline.hpp"
#include "vmmr/eval.hpp"
#include "vmmr/kb.hpp"
#include "vmmr/report.hpp"
#include "vmmr/runlog.hpp"
#include "vmmr/util.hpp"

namespace vmmr::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 5> kImageExtensions = {".jpg", ".jpeg", ".png", ".webp",
                                                               ".bmp"};

struct GlobalFlags {
  std::string config;
  std::size_t k = 0;
  bool determinism = false;
  std::string fixtures_dir;
  std::string report_dir;
  bool no_timestamps = false;
};

class Session {
 public:
  Session(const GlobalFlags& flags, std::ostream& out, std::ostream& err)
      : flags_(flags), out_(out), err_(err) {}

  void load() {
    config_ = flags_.config.empty() ? AppConfig{} : load_app_config(flags_.config);
    if (flags_.k > 0) config_.default_k = flags_.k;
    if (flags_.determinism) config_.determinism_mode = true;
    if (!flags_.fixtures_dir.empty()) {
      config_.fixtures_dir = flags_.fixtures_dir;
      for (auto* chat : {&config_.describer, &config_.reasoner}) {
        if (chat->kind == ChatBackendKind::kFixture) chat->fixture_dir = flags_.fixtures_dir;
      }
    }
    if (!flags_.report_dir.empty()) config_.report_dir = flags_.report_dir;
    if (config_.default_k == 0) throw Error(ErrorCode::kInvalidConfig, "k must be at least 1");
  }

  const AppConfig& config() const { return config_; }
  std::ostream& out() { return out_; }
  std::ostream& err() { return err_; }

  EmitOptions emit_options() const { return {.timestamps = !flags_.no_timestamps}; }
  RunLogOptions run_log_options() const {
    return {.include_timings = !flags_.no_timestamps && !config_.determinism_mode};
  }

  KnowledgeBase kb() const { return load_kb(config_.kb_path); }

  VectorIndex index() const {
    VectorIndex index = load_index(config_.index_path);
    if (index.dim() != config_.embed_backend.dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "index '" + config_.index_path.string() + "' has dim " +
                      std::to_string(index.dim()) + " but the embedder produces " +
                      std::to_string(config_.embed_backend.dim) + "; rebuild the index");
    }
    return index;
  }

 private:
  const GlobalFlags& flags_;
  std::ostream& out_;
  std::ostream& err_;
  AppConfig config_;
};

TruthMap truths_from_queries(std::span<const QueryInput> queries) {
  TruthMap truths;
  for (const auto& q : queries) {
    if (q.true_label) truths.insert_or_assign(q.id, *q.true_label);
  }
  return truths;
}

void print_predictions(std::ostream& out, std::span<const BatchEntry> entries) {
  for (const auto& e : entries) {
    out << e.query_id << '\t';
    if (!e.prediction) {
      out << "ERROR\t" << e.failure->message << '\n';
    } else if (e.prediction->label) {
      out << e.prediction->label->display() << '\t' << to_string(e.prediction->match_rule) << '\n';
    } else {
      out << "ABSTAIN\tabstain\n";
    }
  }
}

// Backend failures outrank validation failures.
int batch_exit_code(std::span<const BatchEntry> entries) {
  int code = kExitOk;
  for (const auto& e : entries) {
    if (!e.failure) continue;
    if (is_backend_error(e.failure->code)) return kExitBackend;
    code = kExitUsage;
  }
  return code;
}

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<ReportFormat> out;
  for (const auto& name : names) {
    if (name == "text") {
      out.push_back(ReportFormat::kTableText);
    } else if (name == "csv") {
      out.push_back(ReportFormat::kCsv);
    } else if (name == "svg") {
      out.push_back(ReportFormat::kSvgHeatmap);
    } else {
      throw Error(ErrorCode::kInvalidInput, "unknown report format '" + name + "'");
    }
  }
  return out;
}

void write_reports(Session& s, const EvalReport& report, const fs::path& dir,
                   const std::vector<std::string>& formats) {
  fs::create_directories(dir);
  const EvalReport* one[] = {&report};
  s.out() << overall_table(one);
  for (auto format : parse_formats(formats)) {
    for (const auto& path : emit_report(report, format, dir, s.emit_options())) {
      s.err() << "wrote " << path.string() << '\n';
    }
  }
}

void write_run_log(Session& s, const fs::path& path, std::span<const BatchEntry> entries,
                   const TruthMap& truths) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_file_atomic(path, serialize_run_log(entries, &truths, s.run_log_options()));
  s.err() << "wrote " << path.string() << '\n';
}

LabelSet class_order(Session& s, const std::string& labels_file) {
  if (!labels_file.empty()) return load_label_set(labels_file);
  if (fs::exists(s.config().kb_path)) return s.kb().label_set();
  return {};
}

// ---- ingest ---------------------------------------------------------------

struct IngestArgs {
  std::string labels;
  std::string descriptions_dir;
  std::string images_dir;
};

std::optional<fs::path> find_image(const fs::path& dir, const std::string& stem) {
  for (auto ext : kImageExtensions) {
    fs::path p = dir / (stem + std::string(ext));
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

int cmd_ingest(Session& s, const IngestArgs& a) {
  const LabelSet labels = load_label_set(a.labels);

  // Resolve every input before touching the knowledge base.
  std::vector<Description> descriptions;
  if (!a.descriptions_dir.empty()) {
    for (const auto& label : labels) {
      const fs::path p = fs::path(a.descriptions_dir) / (label_file_stem(label) + ".txt");
      if (!fs::is_regular_file(p)) {
        throw Error(ErrorCode::kInvalidInput, "no description for label '" + label.display() +
                                                  "' (expected " + p.string() + ")");
      }
      descriptions.emplace_back(read_text_file(p), DescriptionSource::kFixture);
    }
  } else {
    std::vector<QueryInput> inputs;
    for (const auto& label : labels) {
      const std::string stem = label_file_stem(label);
      auto image = find_image(a.images_dir, stem);
      if (!image) {
        throw Error(ErrorCode::kInvalidInput, "no image for label '" + label.display() + "' (expected " +
                                                  (fs::path(a.images_dir) / stem).string() +
                                                  ".jpg or .png)");
      }
      inputs.push_back({stem, ImagePayload{*image, {}, {}}, label});
    }
    const PipelineConfig pipeline = s.config().pipeline(s.config().default_k);
    pipeline.describer.validate(pipeline.determinism_mode);
    auto describer = make_describer(pipeline.describer);
    for (const auto& input : inputs) {
      descriptions.push_back(describer->describe(input, pipeline.describer_template));
    }
  }

  KnowledgeBase kb = fs::exists(s.config().kb_path) ? s.kb() : KnowledgeBase{};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    s.out() << kb.ingest(labels[i], descriptions[i]) << '\n';
  }
  if (s.config().kb_path.has_parent_path()) fs::create_directories(s.config().kb_path.parent_path());
  save_kb(kb, s.config().kb_path);
  spdlog::info("knowledge base {} now holds {} records", s.config().kb_path.string(), kb.size());
  return kExitOk;
}

// ---- index ----------------------------------------------------------------

int cmd_index(Session& s) {
  const KnowledgeBase kb = s.kb();
  if (kb.empty()) throw Error(ErrorCode::kEmptyKnowledgeBase, "empty knowledge base");
  const VectorIndex index =
      build_index(kb, s.config().embed_backend, {.embed_with_label = s.config().embed_with_label});
  if (s.config().index_path.has_parent_path()) {
    fs::create_directories(s.config().index_path.parent_path());
  }
  save_index(index, s.config().index_path);
  s.out() << "dim " << index.dim() << " count " << index.size() << '\n';
  return kExitOk;
}

// ---- recognize ------------------------------------------------------------

struct QueryArgs {
  std::string queries;
  std::string image;
  std::string description;
  std::string id;
};

std::vector<QueryInput> gather_queries(const QueryArgs& a) {
  const int given = !a.queries.empty() + !a.image.empty() + !a.description.empty();
  if (given != 1) {
    throw Error(ErrorCode::kInvalidInput, "give exactly one of --queries, --image, --description");
  }
  if (!a.queries.empty()) return load_queries(a.queries);
  QueryInput q;
  if (!a.image.empty()) {
    if (!fs::is_regular_file(a.image)) {
      throw Error(ErrorCode::kInvalidInput, "cannot read image '" + a.image + "'");
    }
    q.id = a.id.empty() ? fs::path(a.image).stem().string() : a.id;
    q.payload = ImagePayload{a.image, {}, {}};
  } else {
    q.id = a.id.empty() ? "query" : a.id;
    q.payload = Description(a.description);
  }
  return {q};
}

int cmd_recognize(Session& s, const QueryArgs& a, const std::string& run_log_path) {
  const auto queries = gather_queries(a);
  const KnowledgeBase kb = s.kb();
  const VectorIndex index = s.index();
  Recognizer recognizer(s.config().pipeline(s.config().default_k));
  const auto entries = recognizer.recognize_batch(kb, index, queries);
  print_predictions(s.out(), entries);
  const fs::path log = run_log_path.empty() ? s.config().report_dir / "run_log.jsonl"
                                            : fs::path(run_log_path);
  write_run_log(s, log, entries, truths_from_queries(queries));
  return batch_exit_code(entries);
}

// ---- evaluate -------------------------------------------------------------

struct EvalArgs {
  QueryArgs query;
  std::string run_log;
  std::string truths;
  std::string labels;
  std::vector<std::string> formats{"text", "csv", "svg"};
};

int cmd_evaluate(Session& s, const EvalArgs& a) {
  std::vector<BatchEntry> entries;
  TruthMap truths;
  int code = kExitOk;
  if (!a.run_log.empty()) {
    RunLog log = load_run_log(a.run_log);
    entries = std::move(log.entries);
    truths = std::move(log.truths);
  } else {
    const auto queries = gather_queries(a.query);
    Recognizer recognizer(s.config().pipeline(s.config().default_k));
    entries = recognizer.recognize_batch(s.kb(), s.index(), queries);
    truths = truths_from_queries(queries);
    code = batch_exit_code(entries);
  }
  if (!a.truths.empty()) truths = load_truths(a.truths);

  const EvalReport report = compute_report(predictions_for_eval(entries), truths,
                                           s.config().default_k, class_order(s, a.labels));
  if (a.run_log.empty()) write_run_log(s, s.config().report_dir / "run_log.jsonl", entries, truths);
  write_reports(s, report, s.config().report_dir, a.formats);
  return code == kExitUsage && report.n_queries > 0 ? kExitOk : code;
}

// ---- sweep-k --------------------------------------------------------------

struct SweepArgs {
  QueryArgs query;
  std::string truths;
  std::string labels;
  std::vector<std::size_t> k_values{1, 3, 5, 7};
  std::string baseline_paired;
};

double baseline_accuracy(const std::string& paired_path, const TruthMap& truths,
                         const LabelSet& order) {
  const PairedEmbeddingSet set = load_paired_embeddings(paired_path);
  const LabelSet labels = order.empty() ? labels_from_paired(set) : order;
  const BaselineClassifier classifier(set, labels);
  std::vector<Prediction> preds;
  for (const auto& image : set.images()) preds.push_back(classifier.classify(image.query_id));
  return compute_report(preds, truths, 0, labels, std::string(kBaselineMethodName)).accuracy;
}

int cmd_sweep(Session& s, const SweepArgs& a) {
  const auto queries = gather_queries(a.query);
  TruthMap truths = a.truths.empty() ? truths_from_queries(queries) : load_truths(a.truths);
  const KnowledgeBase kb = s.kb();
  const VectorIndex index = s.index();
  for (auto k : a.k_values) {
    if (k > index.size()) {
      s.err() << "warning: k=" << k << " exceeds the knowledge base size " << index.size()
              << "; clamped to " << index.size() << '\n';
    }
  }
  const LabelSet order = a.labels.empty() ? kb.label_set() : load_label_set(a.labels);
  Recognizer recognizer(s.config().pipeline(s.config().default_k));
  const auto rows = sweep_k(recognizer, kb, index, queries, truths, a.k_values, order);

  std::optional<double> baseline;
  if (!a.baseline_paired.empty()) baseline = baseline_accuracy(a.baseline_paired, truths, order);

  const fs::path dir = s.config().report_dir;
  fs::create_directories(dir);
  for (const auto& row : rows) {
    write_run_log(s, dir / ("run_log_k" + std::to_string(row.k) + ".jsonl"), row.entries, truths);
  }
  const std::string table = sweep_table(rows, baseline);
  s.out() << table;
  std::string text = table;
  if (s.emit_options().timestamps) text = "Generated: " + format_rfc3339(now_utc()) + "\n" + text;
  write_file_atomic(dir / "sweep.txt", text);
  write_file_atomic(dir / "sweep.csv", sweep_csv(rows, baseline));
  s.err() << "wrote " << (dir / "sweep.txt").string() << '\n'
          << "wrote " << (dir / "sweep.csv").string() << '\n';

  int code = kExitOk;
  for (const auto& row : rows) code = std::max(code, batch_exit_code(row.entries));
  return code == kExitUsage ? kExitOk : code;
}

// ---- baseline -------------------------------------------------------------

struct BaselineArgs {
  std::string paired;
  std::string truths;
  std::string labels;
  std::vector<std::string> formats{"text", "csv", "svg"};
};

int cmd_baseline(Session& s, const BaselineArgs& a) {
  const PairedEmbeddingSet set = load_paired_embeddings(a.paired);
  const LabelSet labels = a.labels.empty() ? labels_from_paired(set) : load_label_set(a.labels);
  const TruthMap truths = load_truths(a.truths);
  const BaselineClassifier classifier(set, labels);
  std::vector<Prediction> preds;
  for (const auto& image : set.images()) preds.push_back(classifier.classify(image.query_id));
  const EvalReport report =
      compute_report(preds, truths, 0, labels, std::string(kBaselineMethodName));
  write_reports(s, report, s.config().report_dir / "baseline", a.formats);
  return kExitOk;
}

std::vector<std::size_t> parse_k_values(const std::string& text) {
  std::vector<std::size_t> out;
  for (auto part : split(text, ',')) {
    auto v = parse_uint(trim(part));
    if (!v || *v == 0) {
      throw Error(ErrorCode::kInvalidInput, "bad k value '" + std::string(part) + "'");
    }
    out.push_back(static_cast<std::size_t>(*v));
  }
  if (out.empty()) throw Error(ErrorCode::kInvalidInput, "no k values given");
  return out;
}

void add_query_options(CLI::App* cmd, QueryArgs& q) {
  cmd->add_option("--queries", q.queries, "JSONL file of queries");
  cmd->add_option("--image", q.image, "Single image to recognize");
  cmd->add_option("--description", q.description, "Pre-written description (skips the describer)");
  cmd->add_option("--id", q.id, "Query id for --image or --description");
}

}  // namespace

std::string label_file_stem(const VehicleLabel& label) {
  std::string out;
  for (char c : label.canonical_id()) {
    if (c == '/') {
      out += "__";
    } else {
      out += c;
    }
  }
  return out;
}

std::vector<QueryInput> load_queries(const fs::path& path) {
  using nlohmann::json;
  const std::string content = read_text_file(path);
  std::vector<QueryInput> out;
  std::size_t line_no = 0;
  for (auto line : split(content, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorCode::kSchemaError, where + ": not a JSON object");
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw Error(ErrorCode::kSchemaError, where + ": missing string field 'id'");
    }
    QueryInput q;
    q.id = j["id"].get<std::string>();
    if (auto it = j.find("image"); it != j.end() && it->is_string()) {
      fs::path image = it->get<std::string>();
      if (image.is_relative()) image = path.parent_path() / image;
      if (!fs::is_regular_file(image)) {
        throw Error(ErrorCode::kInvalidInput,
                    "cannot read image '" + image.string() + "' for query '" + q.id + "'");
      }
      q.payload = ImagePayload{image, {}, {}};
    } else if (auto d = j.find("description"); d != j.end() && d->is_string()) {
      q.payload = Description(d->get<std::string>());
    } else {
      throw Error(ErrorCode::kSchemaError, where + ": needs 'image' or 'description'");
    }
    if (j.contains("make") || j.contains("model")) {
      q.true_label = canonicalize_label(j.value("make", ""), j.value("model", ""));
    }
    out.push_back(std::move(q));
  }
  if (out.empty()) throw Error(ErrorCode::kBatchEmpty, path.string() + " holds no queries");
  return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Zero-shot vehicle make and model recognition by description retrieval", "vmmr"};
  app.fallthrough();
  app.require_subcommand(1);

  GlobalFlags g;
  app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--k", g.k, "Number of retrieved candidates (overrides default_k)");
  app.add_flag("--determinism", g.determinism, "Temperature 0 and reproducible outputs");
  app.add_option("--fixtures-dir", g.fixtures_dir, "Directory of recorded backend responses");
  app.add_option("--report-dir", g.report_dir, "Where reports and run logs are written");
  app.add_flag("--no-timestamps", g.no_timestamps, "Omit timestamps and timings from outputs");

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Add one description record per label");
  c_ingest->add_option("--labels", ingest.labels, "Label file (make<TAB>model)")->required();
  auto* o_desc = c_ingest->add_option("--descriptions-dir", ingest.descriptions_dir,
                                      "Directory of <make>__<model>.txt descriptions");
  auto* o_img = c_ingest->add_option("--images-dir", ingest.images_dir,
                                     "Directory of <make>__<model>.<ext> reference images");
  o_desc->excludes(o_img);
  c_ingest->require_option(1, 2);

  auto* c_index = app.add_subcommand("index", "Embed the knowledge base into a vector index");

  QueryArgs recognize;
  std::string run_log_path;
  auto* c_recognize = app.add_subcommand("recognize", "Predict labels for query images");
  add_query_options(c_recognize, recognize);
  c_recognize->add_option("--run-log", run_log_path, "Run log path (default <report-dir>/run_log.jsonl)");

  EvalArgs evaluate;
  std::string eval_formats;
  auto* c_evaluate = app.add_subcommand("evaluate", "Score predictions against true labels");
  add_query_options(c_evaluate, evaluate.query);
  c_evaluate->add_option("--run-log", evaluate.run_log, "Score a previously written run log");
  c_evaluate->add_option("--truths", evaluate.truths, "True labels (query_id<TAB>make<TAB>model)");
  c_evaluate->add_option("--labels", evaluate.labels, "Class order for the reports");
  c_evaluate->add_option("--formats", eval_formats, "Comma list of text,csv,svg");

  SweepArgs sweep;
  std::string k_values;
  auto* c_sweep = app.add_subcommand("sweep-k", "Accuracy across several k values");
  add_query_options(c_sweep, sweep.query);
  c_sweep->add_option("--truths", sweep.truths, "True labels (query_id<TAB>make<TAB>model)");
  c_sweep->add_option("--labels", sweep.labels, "Class order for the reports");
  c_sweep->add_option("--k-values", k_values, "Comma list of k values (default 1,3,5,7)");
  c_sweep->add_option("--baseline-paired", sweep.baseline_paired,
                      "Paired embeddings file; adds a baseline row");

  BaselineArgs baseline;
  std::string base_formats;
  auto* c_baseline = app.add_subcommand("baseline", "Image-to-label-text similarity baseline");
  c_baseline->add_option("--paired", baseline.paired, "Paired embeddings file")->required();
  c_baseline->add_option("--truths", baseline.truths, "True labels")->required();
  c_baseline->add_option("--labels", baseline.labels, "Label file (default: labels in --paired)");
  c_baseline->add_option("--formats", base_formats, "Comma list of text,csv,svg");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  auto formats = [](const std::string& text, std::vector<std::string> fallback) {
    if (text.empty()) return fallback;
    std::vector<std::string> out;
    for (auto part : split(text, ',')) out.emplace_back(trim(part));
    return out;
  };

  Session s(g, out, err);
  try {
    s.load();
    if (*c_ingest) return cmd_ingest(s, ingest);
    if (*c_index) return cmd_index(s);
    if (*c_recognize) return cmd_recognize(s, recognize, run_log_path);
    if (*c_evaluate) {
      evaluate.formats = formats(eval_formats, evaluate.formats);
      return cmd_evaluate(s, evaluate);
    }
    if (*c_sweep) {
      if (!k_values.empty()) sweep.k_values = parse_k_values(k_values);
      return cmd_sweep(s, sweep);
    }
    if (*c_baseline) {
      baseline.formats = formats(base_formats, baseline.formats);
      return cmd_baseline(s, baseline);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_backend_error(e.code()) ? kExitBackend : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("vmmr");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace vmmr::cli
