#include "poskit/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>

#include "poskit/config.hpp"
#include "poskit/error.hpp"
#include "poskit/eval_grid.hpp"
#include "poskit/eval_runner.hpp"
#include "poskit/io.hpp"
#include "poskit/pyindex.hpp"
#include "poskit/scoring.hpp"
#include "poskit/serialize.hpp"
#include "poskit/sft_export.hpp"

namespace poskit {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
  std::vector<std::string> overrides;
};

struct EvalOptions {
  std::string backend;
  int concurrency = 0;
  bool reasoning_compare = false;
  std::string suite = "grid";
  std::string prompts_dir;
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

RunConfig resolve(const CommonOptions& common, const std::vector<std::string>& extra = {}) {
  ConfigTable table;
  if (!common.config_path.empty()) table = load_config(common.config_path);
  if (common.seed) {
    if (*common.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
      throw Error(ErrorCode::Config, "seed must fit in a signed 64-bit integer");
    }
    table.set("seed", ConfigValue::of(static_cast<std::int64_t>(*common.seed)));
  }
  if (!common.output_dir.empty()) table.set("output_dir", ConfigValue::of(common.output_dir));
  for (const auto& o : extra) table.apply_override(o);
  for (const auto& o : common.overrides) table.apply_override(o);
  return resolve_run_config(table);
}

void write_snapshot(const RunConfig& config, std::string_view command) {
  write_text_file_atomic(config.output_dir / ("config." + std::string(command) + ".toml"), snapshot(config).to_toml());
}

// Streams JSON lines through a temporary file that is renamed on commit.
class JsonlFile {
 public:
  explicit JsonlFile(fs::path path) : path_(std::move(path)), tmp_(path_.string() + ".tmp") {
    std::error_code ec;
    if (path_.has_parent_path()) fs::create_directories(path_.parent_path(), ec);
    out_.open(tmp_, std::ios::binary | std::ios::trunc);
    if (!out_) throw Error(ErrorCode::Io, "cannot write '" + tmp_.string() + "'");
  }
  ~JsonlFile() {
    if (!committed_) {
      out_.close();
      std::error_code ec;
      fs::remove(tmp_, ec);
    }
  }
  void add(const Json& j) {
    const auto line = j.dump() + "\n";
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
  }
  void commit() {
    out_.close();
    if (!out_) throw Error(ErrorCode::Io, "short write to '" + tmp_.string() + "'");
    std::error_code ec;
    fs::rename(tmp_, path_, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot publish '" + path_.string() + "': " + ec.message());
    committed_ = true;
  }

 private:
  fs::path path_;
  fs::path tmp_;
  std::ofstream out_;
  bool committed_ = false;
};

template <typename Source>
Source chain(std::vector<Source> sources) {
  auto state = std::make_shared<std::pair<std::vector<Source>, std::size_t>>(std::move(sources), 0);
  return [state]() -> decltype(state->first[0]()) {
    while (state->second < state->first.size()) {
      if (auto v = state->first[state->second]()) return v;
      ++state->second;
    }
    return std::nullopt;
  };
}

void build_training_mixture(const RunConfig& config, const ExampleSink& sink) {
  SnippetSource code;
  RecordSource adapted;
  if (config.code_corpora.empty()) {
    code = builtin_code_source(config.mixture.seed);
  } else {
    std::vector<SnippetSource> sources;
    for (const auto& p : config.code_corpora) sources.push_back(jsonl_snippet_source(p, config.corpus_fields));
    code = chain(std::move(sources));
  }
  if (config.adapted_corpora.empty()) {
    adapted = builtin_adapted_source(config.mixture.seed);
  } else {
    std::vector<RecordSource> sources;
    for (const auto& p : config.adapted_corpora) sources.push_back(jsonl_record_source(p, config.corpus_fields));
    adapted = chain(std::move(sources));
  }
  build_mixture(config.mixture, std::move(code), std::move(adapted), sink);
}

void print_counts(std::ostream& out, const std::map<std::string, std::int64_t>& counts, std::string_view label) {
  for (const auto& [k, v] : counts) out << label << " " << k << " " << v << "\n";
}

int cmd_generate(const RunConfig& config, std::ostream& out) {
  validate_grid(config.grid);
  const auto dir = config.output_dir / "prompts";
  Json index = Json::array();
  std::size_t total = 0;
  for (const auto& condition : expand_grid(config.grid)) {
    const auto prompts = build_condition_prompts(config.grid, condition);
    const auto name = condition.id() + ".jsonl";
    write_jsonl(dir / name, to_json_all(prompts));
    index.push_back(Json{{"condition", condition.id()}, {"file", name}, {"count", prompts.size()}});
    out << condition.id() << " " << prompts.size() << "\n";
    total += prompts.size();
  }
  write_text_file_atomic(dir / "index.json", index.dump(2) + "\n");
  write_snapshot(config, "generate");
  out << "conditions " << index.size() << "\n" << "prompts " << total << "\n";
  return kExitOk;
}

int cmd_adapt(const RunConfig& config, std::ostream& out) {
  validate_mixture_config(config.mixture);
  JsonlFile file(config.output_dir / "train.jsonl");
  std::map<std::string, std::int64_t> by_source;
  std::int64_t total = 0;
  build_training_mixture(config, [&](const TrainingExample& ex) {
    file.add(to_json(ex));
    ++by_source[source_of(ex)];
    ++total;
  });
  file.commit();
  write_snapshot(config, "adapt");
  print_counts(out, by_source, "source");
  out << "examples " << total << "\n";
  return kExitOk;
}

int cmd_pyindex(const RunConfig& config, std::ostream& out) {
  if (config.pyindex_per_category < 1) throw Error(ErrorCode::Config, "pyindex.per_category must be >= 1");
  const auto cases = pyindex::generate_benchmark(require_seed(config), config.pyindex_per_category);
  write_jsonl(config.output_dir / "pyindex.jsonl", to_json_all(cases));
  write_snapshot(config, "pyindex");
  std::map<std::string, std::int64_t> counts;
  for (const auto& c : cases) ++counts[std::string(pyindex::to_string(c.category))];
  print_counts(out, counts, "category");
  out << "cases " << cases.size() << "\n";
  return kExitOk;
}

std::vector<std::vector<PromptInstance>> eval_prompt_sets(const RunConfig& config, const EvalOptions& options) {
  std::vector<std::vector<PromptInstance>> sets;
  if (options.suite == "pyindex") {
    std::vector<pyindex::Case> cases;
    const auto file = config.output_dir / "pyindex.jsonl";
    if (!options.prompts_dir.empty()) {
      for (const auto& j : read_jsonl(fs::path(options.prompts_dir) / "pyindex.jsonl")) cases.push_back(case_from_json(j));
    } else {
      cases = pyindex::generate_benchmark(require_seed(config), config.pyindex_per_category);
    }
    std::map<std::string, std::size_t> slot;
    for (const auto& c : cases) {
      auto prompt = pyindex::to_prompt(c);
      const auto id = prompt.condition.id();
      const auto [it, inserted] = slot.emplace(id, sets.size());
      if (inserted) sets.emplace_back();
      sets[it->second].push_back(std::move(prompt));
    }
    return sets;
  }
  if (options.suite != "grid") throw Error(ErrorCode::Config, "unknown suite '" + options.suite + "'");
  if (!options.prompts_dir.empty()) {
    const fs::path dir(options.prompts_dir);
    const auto index = Json::parse(read_text_file(dir / "index.json"));
    for (const auto& entry : index) {
      std::vector<PromptInstance> prompts;
      for (const auto& j : read_jsonl(dir / entry.at("file").get<std::string>())) prompts.push_back(prompt_from_json(j));
      sets.push_back(std::move(prompts));
    }
    return sets;
  }
  validate_grid(config.grid);
  for (const auto& condition : expand_grid(config.grid)) sets.push_back(build_condition_prompts(config.grid, condition));
  return sets;
}

int cmd_eval(const RunConfig& config, const EvalOptions& options, std::ostream& out) {
  require_seed(config);
  validate_backend_config(config.backend);
  const auto sets = eval_prompt_sets(config, options);
  auto backend = make_backend(config.backend);
  ResponseCache cache(config.resolved_cache_dir());
  Runner runner(*backend, config.backend, &cache);

  JsonlFile trials_file(config.output_dir / "trials.jsonl");
  std::int64_t n = 0;
  std::int64_t correct = 0;
  for (const auto& prompts : sets) {
    const auto trials = runner.run_condition(prompts);
    for (const auto& t : trials) {
      trials_file.add(to_json(t));
      ++n;
      correct += t.correct ? 1 : 0;
    }
    if (!prompts.empty()) out << prompts.front().condition.id() << " " << trials.size() << "\n";
  }
  trials_file.commit();

  if (config.reasoning_comparison || options.reasoning_compare) {
    std::vector<PromptInstance> all;
    for (const auto& prompts : sets) all.insert(all.end(), prompts.begin(), prompts.end());
    const auto pairs = runner.run_reasoning_comparison(all);
    JsonlFile pairs_file(config.output_dir / "reasoning_pairs.jsonl");
    for (const auto& p : pairs) {
      pairs_file.add(Json{{"prompt_hash", p.prompt_hash}, {"off", to_json(p.off)}, {"on", to_json(p.on)}});
    }
    pairs_file.commit();
    write_text_file_atomic(config.output_dir / "reasoning_table.csv", reasoning_table_csv(reasoning_table(pairs)));
    out << "reasoning_pairs " << pairs.size() << "\n";
  }
  write_snapshot(config, "eval");
  out << "trials " << n << "\n";
  out << "accuracy " << format_double(n == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(n)) << "\n";
  out << "backend_calls " << runner.backend_calls() << "\n";
  out << "cache_hits " << cache.hits() << "\n";
  return kExitOk;
}

std::vector<TrialRecord> load_trials(const fs::path& path) {
  std::vector<TrialRecord> trials;
  for (const auto& j : read_jsonl(path)) {
    auto t = trial_from_json(j);
    rescore(t);
    trials.push_back(std::move(t));
  }
  if (trials.empty()) throw Error(ErrorCode::EmptySubset, "no trials in '" + path.string() + "'");
  return trials;
}

fs::path trials_path(const RunConfig& config, const std::string& flag) {
  return flag.empty() ? config.output_dir / "trials.jsonl" : fs::path(flag);
}

int cmd_score(const RunConfig& config, const std::string& trials_flag, std::ostream& out) {
  const auto trials = load_trials(trials_path(config, trials_flag));
  const auto report = summarize(trials);
  const auto dir = config.output_dir / "reports";
  write_report_json(report, dir / "report.json");
  write_summary_csv(report, dir);
  for (const auto& summary : report.conditions) write_accuracy_csv(summary, dir);
  for (const auto& [id, group] : group_by_condition(trials)) {
    if (group.front().condition.task == TaskKind::PyIndex) continue;
    write_confusion_csv(confusion(group), dir);
  }
  write_snapshot(config, "score");
  out << "trials " << report.n_trials << "\n";
  out << "conditions " << report.conditions.size() << "\n";
  out << "accuracy " << format_double(report.overall) << "\n";
  return kExitOk;
}

int cmd_report(const RunConfig& config, const std::string& trials_flag, std::ostream& out) {
  const auto trials = load_trials(trials_path(config, trials_flag));
  const auto report = summarize(trials);
  std::string text;
  char line[256];
  std::snprintf(line, sizeof line, "%-56s %8s %9s %9s %9s\n", "condition", "trials", "accuracy", "mean", "sd");
  text += line;
  for (const auto& s : report.conditions) {
    std::snprintf(line, sizeof line, "%-56s %8d %9.4f %9.4f %9.4f\n", s.condition_id.c_str(), s.n_trials, s.accuracy,
                  s.mean, s.sd);
    text += line;
  }
  if (!report.asymmetry.empty()) {
    std::snprintf(line, sizeof line, "\n%-32s %9s %9s %10s\n", "task", "forward", "backward", "asymmetry");
    text += line;
    for (const auto& a : report.asymmetry) {
      std::snprintf(line, sizeof line, "%-32s %9.4f %9.4f %+10.4f\n", a.task.c_str(), a.forward.mean, a.backward.mean,
                    a.asymmetry);
      text += line;
    }
  }
  std::snprintf(line, sizeof line, "\noverall %.4f over %d trials\n", report.overall, report.n_trials);
  text += line;
  write_text_file_atomic(config.output_dir / "reports" / "report.txt", text);
  write_snapshot(config, "report");
  out << text;
  return kExitOk;
}

int cmd_export_sft(const RunConfig& config, const std::string& input, std::ostream& out) {
  const auto seed = require_seed(config);
  const auto dir = config.output_dir / "sft";
  SftManifest manifest;
  if (!input.empty()) {
    std::vector<TrainingExample> examples;
    for (const auto& j : read_jsonl(input)) examples.push_back(example_from_json(j));
    manifest = export_sft(examples, dir, seed);
  } else {
    validate_mixture_config(config.mixture);
    SftWriter writer(dir, seed);
    build_training_mixture(config, [&](const TrainingExample& ex) { writer.add(ex); });
    manifest = writer.finish();
  }
  write_snapshot(config, "export-sft");
  print_counts(out, manifest.by_source, "source");
  out << "records " << manifest.total << "\n";
  out << "sha256 " << manifest.records_sha256 << "\n";
  return kExitOk;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument:
    case ErrorCode::PoolTooSmall:
    case ErrorCode::IncompatibleVariant:
      return kExitUsage;
    default:
      return kExitRuntime;
  }
}

void add_common(CLI::App* sub, CommonOptions& common) {
  sub->add_option("-c,--config", common.config_path, "TOML configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", common.seed, "global seed");
  sub->add_option("-o,--out", common.output_dir, "output directory");
  sub->add_option("--set", common.overrides, "override a setting, key=value")->take_all();
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"poskit: positional retrieval benchmark and training data toolkit", "poskit"};
  app.require_subcommand(1);

  CommonOptions common;
  EvalOptions eval;
  std::string trials_flag;
  std::string sft_input;
  std::vector<std::string> adapted_paths;
  std::vector<std::string> code_paths;

  auto* generate = app.add_subcommand("generate", "write evaluation prompt sets for every grid condition");
  auto* adapt = app.add_subcommand("adapt", "build the training mixture into train.jsonl");
  auto* pyindex = app.add_subcommand("pyindex", "write the Python indexing benchmark");
  auto* eval_cmd = app.add_subcommand("eval", "run a backend over the prompt sets");
  auto* score = app.add_subcommand("score", "rescore trials and write accuracy and confusion reports");
  auto* report = app.add_subcommand("report", "print a per-condition accuracy table");
  auto* export_cmd = app.add_subcommand("export-sft", "export training examples with answer spans");
  for (auto* sub : {generate, adapt, pyindex, eval_cmd, score, report, export_cmd}) add_common(sub, common);

  adapt->add_option("--corpus", adapted_paths, "adapted corpus JSONL (repeatable)");
  adapt->add_option("--code-corpus", code_paths, "code snippet JSONL (repeatable)");
  export_cmd->add_option("--corpus", adapted_paths, "adapted corpus JSONL (repeatable)");
  export_cmd->add_option("--code-corpus", code_paths, "code snippet JSONL (repeatable)");
  export_cmd->add_option("--input", sft_input, "export an existing train.jsonl instead of building the mixture");
  eval_cmd->add_option("--backend", eval.backend, "http, mock-oracle, mock-random or mock-reasoning-oracle");
  eval_cmd->add_option("--concurrency", eval.concurrency, "maximum requests in flight")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--reasoning-compare", eval.reasoning_compare, "also run every prompt with reasoning off and on");
  eval_cmd->add_option("--suite", eval.suite, "grid or pyindex")->check(CLI::IsMember({"grid", "pyindex"}));
  eval_cmd->add_option("--prompts", eval.prompts_dir, "read prompts from a generate or pyindex output directory");
  score->add_option("--trials", trials_flag, "trial file (default <out>/trials.jsonl)");
  report->add_option("--trials", trials_flag, "trial file (default <out>/trials.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    std::vector<std::string> extra;
    auto to_list = [](const std::vector<std::string>& paths) {
      std::vector<ConfigValue> values;
      for (const auto& p : paths) values.push_back(ConfigValue::of(p));
      return ConfigValue::of(std::move(values)).render();
    };
    if (!adapted_paths.empty()) extra.push_back("corpus.adapted=" + to_list(adapted_paths));
    if (!code_paths.empty()) extra.push_back("corpus.code=" + to_list(code_paths));
    if (!eval.backend.empty()) extra.push_back("backend.kind=\"" + eval.backend + "\"");
    if (eval.concurrency > 0) extra.push_back("backend.concurrency=" + std::to_string(eval.concurrency));

    const RunConfig config = resolve(common, extra);
    if (*generate) return (require_seed(config), cmd_generate(config, out));
    if (*adapt) return (require_seed(config), cmd_adapt(config, out));
    if (*pyindex) return cmd_pyindex(config, out);
    if (*eval_cmd) return cmd_eval(config, eval, out);
    if (*score) return cmd_score(config, trials_flag, out);
    if (*report) return cmd_report(config, trials_flag, out);
    if (*export_cmd) return cmd_export_sft(config, sft_input, out);
  } catch (const Error& e) {
    err << "poskit: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "poskit: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace poskit
