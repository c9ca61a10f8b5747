#include "biasscope_cli/cli.hpp"

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "biasscope/annotation.hpp"
#include "biasscope/config.hpp"
#include "biasscope/error.hpp"
#include "biasscope/pipeline.hpp"
#include "biasscope/promptkit.hpp"
#include "biasscope/report.hpp"
#include "biasscope/runner.hpp"
#include "biasscope/service.hpp"
#include "biasscope/text.hpp"
#include "biasscope/version.hpp"

namespace biasscope::cli {

namespace {

using nlohmann::json;

// Bad arguments detected after parsing; exit code 1.
struct UsageError : std::runtime_error {
  UsageError(const std::string& flag, const std::string& problem, const std::string& fix)
      : std::runtime_error(fmt::format("{}: {}\n  fix: {}", flag, problem, fix)) {}
};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct GlobalOptions {
  std::string config;
  std::string runs_dir;
  std::string annotations_dir;
  std::string profiles_dir;
};

struct Context {
  CliConfig config;
  std::optional<ProfileRegistry> own_registry;

  const ProfileRegistry& registry() const { return own_registry ? *own_registry : default_registry(); }
};

Context make_context(const GlobalOptions& g) {
  Context ctx;
  std::filesystem::path path = g.config;
  if (path.empty()) {
    if (const char* env = std::getenv("BIASSCOPE_CONFIG"); env && *env) {
      path = env;
    } else if (std::filesystem::exists("biasscope.toml")) {
      path = "biasscope.toml";
    }
  }
  if (!path.empty()) {
    ctx.config = load_config(path);
  } else {
    ctx.config = parse_config("", std::filesystem::current_path());
  }
  if (!g.runs_dir.empty()) ctx.config.runs_dir = g.runs_dir;
  if (!g.annotations_dir.empty()) ctx.config.annotations_dir = g.annotations_dir;
  if (!g.profiles_dir.empty()) ctx.config.profiles_dir = g.profiles_dir;
  if (ctx.config.profiles_dir) ctx.own_registry = ProfileRegistry::load(*ctx.config.profiles_dir);
  return ctx;
}

std::vector<Arm> resolve_arms(const Context& ctx, const std::vector<std::string>& ids, const std::string& flag) {
  try {
    return ctx.config.resolve_arms(ids);
  } catch (const Error& e) {
    throw UsageError(flag, std::string(e.detail()), "use one of the [backend.<id>] sections in the config");
  }
}

std::vector<BiasType> parse_biases(const std::vector<std::string>& ids) {
  if (ids.size() == 1 && text::iequals(ids.front(), "all")) return {kAllBiases.begin(), kAllBiases.end()};
  std::vector<BiasType> out;
  for (const auto& id : ids) {
    try {
      const BiasType b = parse_bias_type(id);
      if (std::find(out.begin(), out.end(), b) != out.end()) {
        throw UsageError("--biases", "'" + id + "' is listed twice", "list each bias once");
      }
      out.push_back(b);
    } catch (const Error& e) {
      throw UsageError("--biases", std::string(e.detail()), "pass 'all' or a comma-separated list of bias ids");
    }
  }
  return out;
}

template <typename T, typename Parse>
T parse_enum(const std::string& value, const std::string& flag, Parse parse, const std::string& fix) {
  const auto parsed = parse(value);
  if (!parsed) throw UsageError(flag, "unsupported value '" + value + "'", fix);
  return *parsed;
}

// ---- ingest ---------------------------------------------------------------

struct IngestOptions {
  std::vector<std::string> files;
  std::string meta;
  std::string corpus;
};

int cmd_ingest(const Context& ctx, const IngestOptions& o, std::ostream& out) {
  json meta;
  try {
    meta = json::parse(!o.meta.empty() && o.meta.front() == '@' ? read_file(o.meta.substr(1)) : o.meta);
  } catch (const json::exception& e) {
    throw UsageError("--meta", std::string("not valid JSON: ") + e.what(),
                     "pass an object such as '{\"source_name\":\"x\",\"rigor\":\"high\"}' or @file.json");
  }
  if (!meta.is_object()) throw UsageError("--meta", "must be a JSON object", "wrap the fields in {...}");
  if (meta.contains("text")) throw UsageError("--meta", "must not contain 'text'", "text comes from the files");

  std::vector<Document> docs;
  for (const auto& file : o.files) {
    json rec = meta;
    rec["text"] = read_file(file);
    if (!rec.contains("source_name")) rec["source_name"] = std::filesystem::path(file).filename().string();
    try {
      docs.push_back(document_from_json(rec));
    } catch (const Error& e) {
      throw Error(e.code(), file + ": " + std::string(e.detail()));
    }
  }
  const std::filesystem::path corpus = o.corpus.empty() ? ctx.config.corpus : std::filesystem::path(o.corpus);
  append_to_corpus(corpus, docs);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    out << docs[i].doc_id << '\t' << o.files[i] << '\t' << text::decode_utf8(docs[i].text).size() << '\n';
  }
  return kExitOk;
}

// ---- split ----------------------------------------------------------------

struct SplitOptions {
  std::string doc;
  std::optional<std::size_t> max;
  std::optional<std::size_t> overlap;
  std::string corpus;
  bool lenient = false;
};

int cmd_split(const Context& ctx, const SplitOptions& o, std::ostream& out) {
  const std::filesystem::path path = o.corpus.empty() ? ctx.config.corpus : std::filesystem::path(o.corpus);
  const auto corpus = load_corpus(path, CorpusOptions{o.lenient});
  const Document* match = nullptr;
  for (const auto& d : corpus) {
    if (d.doc_id.rfind(o.doc, 0) != 0) continue;
    if (match) throw UsageError("--doc", "prefix '" + o.doc + "' matches several documents", "pass more characters");
    match = &d;
  }
  if (!match) throw UsageError("--doc", "no document with id '" + o.doc + "' in " + path.string(), "run ingest first");

  SplitterConfig cfg = ctx.config.splitter;
  if (o.max) cfg.max_chunk_chars = *o.max;
  if (o.overlap) cfg.overlap_chars = *o.overlap;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw UsageError("--max/--overlap", std::string(e.detail()), "keep overlap below max");
  }
  const auto chunks = split_document(*match, cfg);
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    const auto& c = chunks[i];
    out << fmt::format("--- chunk {} [{}, {}) {} chars, overlap {} ---\n", c.index, c.span_start, c.span_end,
                       c.span_end - c.span_start, overlap_with_previous(chunks, i))
        << c.text << '\n';
  }
  return kExitOk;
}

// ---- run ------------------------------------------------------------------

struct RunOptions {
  std::string corpus;
  std::vector<std::string> arms;
  std::vector<std::string> biases;
  std::string run_id;
  std::string resume;
  std::optional<std::size_t> max_in_flight;
  bool lenient = false;
  bool dry_run = false;
  bool fsync = false;
};

int cmd_run(const Context& ctx, const RunOptions& o, std::ostream& out, std::ostream& err) {
  RunStore store(ctx.config.runs_dir);
  RunPlan plan;
  if (!o.resume.empty()) {
    if (!o.corpus.empty() || !o.arms.empty() || !o.biases.empty() || !o.run_id.empty()) {
      throw UsageError("--resume", "cannot be combined with --corpus, --arms, --biases or --run-id",
                       "the stored plan defines them; drop the other flags");
    }
    if (!store.has_plan(o.resume)) throw UsageError("--resume", "no run '" + o.resume + "' in " + store.root().string(), "check `biasscope report` run ids");
    plan = store.read_plan(o.resume);
    if (o.max_in_flight) plan.max_in_flight = *o.max_in_flight;
  } else {
    if (o.corpus.empty()) throw UsageError("--corpus", "is required", "pass --corpus <path> or --resume <run_id>");
    if (o.arms.empty()) throw UsageError("--arms", "is required", "pass a comma-separated list of backend ids");
    if (o.biases.empty()) throw UsageError("--biases", "is required", "pass 'all' or a comma-separated list");
    PlanRequest req;
    req.corpus_ref = o.corpus;
    req.corpus_lenient = o.lenient;
    req.splitter = ctx.config.splitter;
    req.biases = parse_biases(o.biases);
    req.arms = resolve_arms(ctx, o.arms, "--arms");
    if (o.max_in_flight) req.max_in_flight = *o.max_in_flight;
    if (!o.run_id.empty()) req.run_id = o.run_id;

    if (o.dry_run) {
      plan.run_id = o.run_id.empty() ? "dry-run" : o.run_id;
      plan.corpus_ref = std::filesystem::absolute(req.corpus_ref);
      plan.corpus_lenient = req.corpus_lenient;
      plan.splitter = req.splitter;
      plan.biases = req.biases;
      plan.arms = req.arms;
      plan.max_in_flight = req.max_in_flight;
      plan.validate();
      const auto tasks = materialize_tasks(plan);
      out << "doc_id\tchunk\tbias\tbackend_id\tprompt_mode\tprompt_hash\tfixture_key\n";
      for (const auto& t : tasks) {
        const Arm& arm = plan.arms[t.arm_index];
        const Prompt prompt = build_prompt(arm.mode, ctx.registry().profile_of(t.key.bias), t.chunk_text);
        out << t.key.doc_id << '\t' << t.key.chunk_index << '\t' << identifier_of(t.key.bias) << '\t'
            << t.key.backend_id << '\t' << identifier_of(arm.mode) << '\t' << prompt.prompt_hash() << '\t'
            << fixture_key(render_messages(prompt)) << '\n';
      }
      err << tasks.size() << " tasks planned (dry run, nothing written)\n";
      return kExitOk;
    }
    plan = plan_run(store, req);
  }

  ExecuteOptions exec;
  exec.registry = &ctx.registry();
  exec.fsync_each_record = o.fsync;
  const auto summary = execute_run(store, plan, exec);
  out << "run_id: " << plan.run_id << '\n'
      << "store: " << summary.store_path.string() << '\n'
      << "planned: " << summary.planned << '\n'
      << "appended: " << summary.appended << '\n'
      << "skipped: " << summary.skipped << '\n'
      << "completed: " << summary.completed << '\n'
      << "unparseable: " << summary.unparseable << '\n'
      << "errored: " << summary.errored << '\n';
  if (summary.errored > 0) err << summary.errored << " task(s) failed; see the error field in " << summary.store_path.string() << '\n';
  return kExitOk;
}

// ---- evaluate / report / compare -------------------------------------------

struct EvalOptions {
  std::string run;
  std::string against;
  std::string level;
  std::vector<std::string> arms;
  std::string format;
};

EvaluateRequest make_request(const Context& ctx, const EvalOptions& o, const AnnotationStore* annotations) {
  EvaluateRequest req;
  req.run_id = o.run;
  RunStore store(ctx.config.runs_dir);
  if (!store.has_plan(o.run)) {
    throw UsageError("--run", "no run '" + o.run + "' in " + store.root().string(), "pass an id from the runs directory");
  }
  const RunPlan plan = store.read_plan(o.run);
  for (const auto& id : o.arms) {
    const bool known = std::any_of(plan.arms.begin(), plan.arms.end(),
                                   [&](const Arm& a) { return a.backend.backend_id == id; });
    if (!known) {
      std::vector<std::string> ids;
      for (const auto& a : plan.arms) ids.push_back(a.backend.backend_id);
      throw UsageError("--arms", "run " + o.run + " has no arm '" + id + "'", "use one of: " + text::join(ids, ", "));
    }
  }
  req.arms = o.arms;
  if (o.against.empty()) {
    req.source = annotations && !judged_from_annotations(*annotations, o.run).empty() ? JudgeSource::Annotations
                                                                                      : JudgeSource::Labels;
  } else {
    req.source = parse_enum<JudgeSource>(o.against, "--against", parse_judge_source, "use labels or annotations");
  }
  if (!o.level.empty()) req.level = parse_enum<JudgeLevel>(o.level, "--level", parse_judge_level, "use chunk or document");
  return req;
}

std::optional<AnnotationStore> open_annotations(const Context& ctx) {
  if (!std::filesystem::exists(ctx.config.annotations_dir)) return std::nullopt;
  return std::make_optional<AnnotationStore>(ctx.config.annotations_dir);
}

void print_warnings(const EvaluationReport& report, std::ostream& err) {
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
}

int cmd_report(const Context& ctx, const EvalOptions& o, ReportFormat fallback, std::ostream& out, std::ostream& err) {
  const auto format = o.format.empty() ? fallback
                                       : parse_enum<ReportFormat>(o.format, "--format", parse_report_format,
                                                                  "use csv, json or table");
  const auto annotations = open_annotations(ctx);
  const AnnotationStore* store = annotations ? &*annotations : nullptr;
  const auto request = make_request(ctx, o, store);
  if (request.source == JudgeSource::Annotations && !store) {
    throw UsageError("--against", "annotations directory " + ctx.config.annotations_dir.string() + " does not exist",
                     "generate and submit annotation tasks first, or use --against labels");
  }
  const auto report = evaluate_run(RunStore(ctx.config.runs_dir), store, request);
  out << render_report(report, format);
  print_warnings(report, err);
  return kExitOk;
}

int cmd_compare(const Context& ctx, const EvalOptions& o, std::ostream& out) {
  const auto format = o.format.empty() ? ReportFormat::Table
                                       : parse_enum<ReportFormat>(o.format, "--format", parse_report_format,
                                                                  "use csv, json or table");
  if (o.arms.size() == 1) throw UsageError("--arms", "needs at least two arms", "list two or more backend ids");
  const auto annotations = open_annotations(ctx);
  const AnnotationStore* store = annotations ? &*annotations : nullptr;
  const auto request = make_request(ctx, o, store);
  out << render_comparison(compare_run(RunStore(ctx.config.runs_dir), store, request), format);
  return kExitOk;
}

// ---- annotation -------------------------------------------------------------

struct TasksOptions {
  std::string run;
  std::string phase;
  std::vector<std::string> arms;
};

int cmd_tasks(const Context& ctx, const TasksOptions& o, std::ostream& out) {
  const Phase phase = parse_enum<Phase>(o.phase, "--phase", parse_phase, "use 1 or 2");
  RunStore runs(ctx.config.runs_dir);
  if (!runs.has_plan(o.run)) throw UsageError("--run", "no run '" + o.run + "'", "pass an id from the runs directory");
  if (o.arms.size() != arms_for(phase)) {
    throw UsageError("--arms", fmt::format("phase {} needs exactly {} arm(s)", identifier_of(phase), arms_for(phase)),
                     "pass the arms whose outputs annotators should review");
  }
  const RunPlan plan = runs.read_plan(o.run);
  const auto corpus = load_corpus(plan.corpus_ref, CorpusOptions{plan.corpus_lenient});
  const auto tasks = generate_tasks(plan, load_records(runs, o.run), corpus, phase, o.arms);
  AnnotationStore store(ctx.config.annotations_dir);
  const auto added = store.add_tasks(tasks);
  out << "tasks: " << tasks.size() << '\n' << "added: " << added << '\n';
  return kExitOk;
}

struct ExportOptions {
  std::string phase;
  std::string run;
};

int cmd_export(const Context& ctx, const ExportOptions& o, std::ostream& out) {
  const Phase phase = parse_enum<Phase>(o.phase, "--phase", parse_phase, "use 1 or 2");
  if (!std::filesystem::exists(ctx.config.annotations_dir)) return kExitOk;
  const AnnotationStore store(ctx.config.annotations_dir);
  const auto exported =
      store.export_annotations(phase, o.run.empty() ? std::nullopt : std::optional<std::string>(o.run));
  std::size_t row = 0;
  for (const auto& rec : exported.records) {
    auto line = record_to_json(rec);
    nlohmann::ordered_json judged = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < rec.derived.size(); ++i, ++row) {
      const auto& j = exported.judged[row];
      judged.push_back({{"doc_id", j.sample.doc_id},
                        {"chunk_index", j.sample.chunk_index},
                        {"bias", identifier_of(j.sample.bias)},
                        {"backend_id", j.backend_id},
                        {"model", j.model ? nlohmann::ordered_json(identifier_of(*j.model)) : nlohmann::ordered_json(nullptr)},
                        {"human", identifier_of(j.human)},
                        {"judgment", identifier_of(j.judgment)}});
    }
    line["judged"] = std::move(judged);
    out << line.dump() << '\n';
  }
  return kExitOk;
}

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string console;
  int lease_minutes = 15;
};

AnnotationService* g_service = nullptr;

extern "C" void on_stop_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const Context& ctx, const ServeOptions& o, std::ostream& err) {
  ServiceOptions opts;
  opts.runs_dir = ctx.config.runs_dir;
  opts.annotations_dir = ctx.config.annotations_dir;
  if (!o.console.empty()) {
    opts.console_dir = o.console;
  } else if (ctx.config.console_dir) {
    opts.console_dir = ctx.config.console_dir;
  }
  opts.registry = &ctx.registry();
  opts.annotation.lease_duration = std::chrono::minutes(o.lease_minutes);
  AnnotationService service(std::move(opts));
  const int port = service.bind(o.host, o.port);
  err << "listening on http://" << o.host << ":" << port << '\n';
  err.flush();
  g_service = &service;
  std::signal(SIGINT, on_stop_signal);
  std::signal(SIGTERM, on_stop_signal);
  const bool ok = service.listen();
  g_service = nullptr;
  return ok ? kExitOk : kExitRuntime;
}

// ---- prompt (hidden) --------------------------------------------------------

struct PromptOptions {
  std::string bias;
  std::string mode = "structured";
  std::string text_file;
  std::string goldens;
};

int cmd_prompt(const Context& ctx, const PromptOptions& o, std::ostream& out) {
  if (!o.goldens.empty()) {
    const std::filesystem::path dir = o.goldens;
    const std::string sample = read_file(dir / "sample.txt");
    for (BiasType b : kAllBiases) {
      for (PromptMode m : {PromptMode::Structured, PromptMode::Basic}) {
        const auto file = dir / fmt::format("{}.{}.txt", identifier_of(b), identifier_of(m));
        std::ofstream(file, std::ios::binary) << render_golden(build_prompt(m, ctx.registry().profile_of(b), sample));
        out << file.string() << '\n';
      }
    }
    return kExitOk;
  }
  if (o.bias.empty()) throw UsageError("--bias", "is required", "pass a bias id such as straw-man");
  BiasType bias;
  try {
    bias = parse_bias_type(o.bias);
  } catch (const Error& e) {
    throw UsageError("--bias", std::string(e.detail()), "pass one of the listed ids");
  }
  const auto mode = parse_enum<PromptMode>(o.mode, "--mode", parse_prompt_mode, "use structured or basic");
  std::string sample;
  if (o.text_file.empty()) {
    sample.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  } else {
    sample = read_file(o.text_file);
  }
  out << render_golden(build_prompt(mode, ctx.registry().profile_of(bias), sample));
  return kExitOk;
}

void print_version(std::ostream& out, std::ostream& err) {
  out << "biasscope " << library_version() << '\n' << "template_version " << kTemplateVersion << '\n';
  try {
    for (const auto& p : default_registry().all_profiles()) {
      out << "profile " << identifier_of(p.bias) << ' ' << p.version << '\n';
    }
  } catch (const Error& e) {
    err << "profiles unavailable: " << e.what() << '\n';
  }
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cognitive bias detection and evaluation pipeline", "biasscope"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalOptions g;
  bool version = false;
  app.add_flag("--version", version, "Print tool, template and profile versions");
  app.add_option("--config", g.config, "Config file (default: $BIASSCOPE_CONFIG or ./biasscope.toml)");
  app.add_option("--runs-dir", g.runs_dir, "Override the runs directory");
  app.add_option("--annotations-dir", g.annotations_dir, "Override the annotations directory");
  app.add_option("--profiles-dir", g.profiles_dir, "Override the bias profile directory");

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Add text files to the corpus");
  ingest_cmd->add_option("files", ingest.files, "Text files")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--meta", ingest.meta, "Source metadata as JSON or @file")->required();
  ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus file (default from config)");

  SplitOptions split;
  auto* split_cmd = app.add_subcommand("split", "Print the chunks of one document");
  split_cmd->add_option("--doc", split.doc, "Document id or unique prefix")->required();
  split_cmd->add_option("--max", split.max, "Maximum chunk length in characters");
  split_cmd->add_option("--overlap", split.overlap, "Overlap in characters");
  split_cmd->add_option("--corpus", split.corpus, "Corpus file (default from config)");
  split_cmd->add_flag("--lenient", split.lenient, "Accept unknown keys in corpus records");

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Plan and execute detection over a corpus");
  run_cmd->add_option("--corpus", run.corpus, "Corpus file");
  run_cmd->add_option("--arms", run.arms, "Backend ids from the config")->delimiter(',');
  run_cmd->add_option("--biases", run.biases, "Bias ids or 'all'")->delimiter(',');
  run_cmd->add_option("--run-id", run.run_id, "Explicit run id");
  run_cmd->add_option("--resume", run.resume, "Continue an existing run");
  run_cmd->add_option("--max-in-flight", run.max_in_flight, "Concurrent backend calls")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--lenient", run.lenient, "Accept unknown keys in corpus records");
  run_cmd->add_flag("--dry-run", run.dry_run, "List planned tasks with fixture keys and exit");
  run_cmd->add_flag("--fsync", run.fsync, "fsync after every record");

  EvalOptions evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Judge a run and print the full report");
  evaluate_cmd->add_option("--run", evaluate.run, "Run id")->required();
  evaluate_cmd->add_option("--against", evaluate.against, "labels or annotations")->required();
  evaluate_cmd->add_option("--level", evaluate.level, "chunk or document (labels only)");
  evaluate_cmd->add_option("--arms", evaluate.arms, "Restrict to these arms")->delimiter(',');
  evaluate_cmd->add_option("--format", evaluate.format, "json (default), csv or table");

  EvalOptions report;
  auto* report_cmd = app.add_subcommand("report", "Print accuracy tables for a run");
  report_cmd->add_option("--run", report.run, "Run id")->required();
  report_cmd->add_option("--format", report.format, "csv, json or table (default)");
  report_cmd->add_option("--against", report.against, "labels or annotations (default: annotations when present)");
  report_cmd->add_option("--level", report.level, "chunk or document (labels only)");
  report_cmd->add_option("--arm,--arms", report.arms, "Restrict to these arms")->delimiter(',');

  EvalOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "Compare arms over the same samples");
  compare_cmd->add_option("--run", compare.run, "Run id")->required();
  compare_cmd->add_option("--arms", compare.arms, "Arms to compare (default: all)")->delimiter(',');
  compare_cmd->add_option("--against", compare.against, "labels or annotations (default: annotations when present)");
  compare_cmd->add_option("--level", compare.level, "chunk or document (labels only)");
  compare_cmd->add_option("--format", compare.format, "csv, json or table (default)");

  TasksOptions tasks;
  auto* tasks_cmd = app.add_subcommand("tasks", "Generate annotation tasks from a run");
  tasks_cmd->add_option("--run", tasks.run, "Run id")->required();
  tasks_cmd->add_option("--phase", tasks.phase, "1 or 2")->required();
  tasks_cmd->add_option("--arms", tasks.arms, "One arm for phase 1, three for phase 2")->required()->delimiter(',');

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the annotation service");
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks a free one)")->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--host", serve.host, "Bind address");
  serve_cmd->add_option("--console", serve.console, "Built console assets served at /");
  serve_cmd->add_option("--lease-minutes", serve.lease_minutes, "Task lease length")->check(CLI::PositiveNumber);

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Print annotation records with judged rows as JSON lines");
  export_cmd->add_option("--phase", exp.phase, "1 or 2")->required();
  export_cmd->add_option("--run", exp.run, "Only tasks of this run");

  PromptOptions prompt;
  auto* prompt_cmd = app.add_subcommand("prompt", "Render a prompt in golden-file layout");
  prompt_cmd->group("");
  prompt_cmd->add_option("--bias", prompt.bias, "Bias id");
  prompt_cmd->add_option("--mode", prompt.mode, "structured or basic");
  prompt_cmd->add_option("--text-file", prompt.text_file, "Sample text (default: stdin)");
  prompt_cmd->add_option("--goldens", prompt.goldens, "Rewrite every golden in this directory from its sample.txt");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n  fix: see `biasscope " << (app.get_subcommands().empty() ? "" : app.get_subcommands().front()->get_name() + " ")
        << "--help`\n";
    return kExitUsage;
  }

  // Help requested on a subcommand surfaces as CallForHelp above; nothing else to do.
  if (version) {
    print_version(out, err);
    return kExitOk;
  }
  if (app.get_subcommands().empty()) {
    err << "error: no command given\n  fix: run `biasscope --help` for the list of commands\n";
    return kExitUsage;
  }

  try {
    const Context ctx = make_context(g);
    const auto* sub = app.get_subcommands().front();
    if (sub == ingest_cmd) return cmd_ingest(ctx, ingest, out);
    if (sub == split_cmd) return cmd_split(ctx, split, out);
    if (sub == run_cmd) return cmd_run(ctx, run, out, err);
    if (sub == evaluate_cmd) return cmd_report(ctx, evaluate, ReportFormat::Json, out, err);
    if (sub == report_cmd) return cmd_report(ctx, report, ReportFormat::Table, out, err);
    if (sub == compare_cmd) return cmd_compare(ctx, compare, out);
    if (sub == tasks_cmd) return cmd_tasks(ctx, tasks, out);
    if (sub == serve_cmd) return cmd_serve(ctx, serve, err);
    if (sub == export_cmd) return cmd_export(ctx, exp, out);
    if (sub == prompt_cmd) return cmd_prompt(ctx, prompt, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace biasscope::cli
