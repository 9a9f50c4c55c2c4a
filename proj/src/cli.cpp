#include "arena/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "arena/evaluate.hpp"
#include "arena/observe.hpp"

namespace arena::cli {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const fs::path& p, const std::string& data) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("IoError", "cannot write " + p.string());
  out << data;
}

std::vector<fs::path> files_with_ext(const fs::path& dir, const std::string& ext, bool recursive) {
  std::vector<fs::path> out;
  auto take = [&](const fs::directory_entry& e) {
    if (e.is_regular_file() && e.path().extension() == ext) out.push_back(e.path());
  };
  if (recursive) {
    for (const auto& e : fs::recursive_directory_iterator(dir)) take(e);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) take(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

agent::PolicyFactory make_policies(const RunConfig& cfg, const corpus::Corpus& c) {
  if (cfg.policy == "random") {
    return [](const taskspec::TaskSpec&, std::uint64_t seed) -> std::unique_ptr<agent::Policy> {
      return std::make_unique<agent::RandomPolicy>(seed);
    };
  }
  if (cfg.policy == "remote") {
    std::string endpoint = cfg.endpoint;
    return [endpoint](const taskspec::TaskSpec&, std::uint64_t) -> std::unique_ptr<agent::Policy> {
      return std::make_unique<agent::RemotePolicy>(endpoint);
    };
  }
  // Tasks without an oracle get an empty script, which FAILs immediately.
  auto oracles = c.oracles;
  return [oracles](const taskspec::TaskSpec& task, std::uint64_t) -> std::unique_ptr<agent::Policy> {
    auto it = oracles.find(task.id);
    return std::make_unique<agent::ScriptedPolicy>(it == oracles.end() ? std::vector<std::string>{} : it->second);
  };
}

}  // namespace

void check_config(const RunConfig& cfg) {
  if (cfg.policy != "scripted" && cfg.policy != "random" && cfg.policy != "remote") {
    throw ConfigError("unknown policy '" + cfg.policy + "'");
  }
  if (cfg.policy == "remote" && cfg.endpoint.empty()) throw ConfigError("--policy remote needs --endpoint");
  if (cfg.workers == 0) throw ConfigError("--workers must be at least 1");
  auto names = observe::detector_profile_names();
  if (std::find(names.begin(), names.end(), cfg.detector) == names.end()) {
    throw ConfigError("unknown detector profile '" + cfg.detector + "'");
  }
}

std::string effective_run_id(const RunConfig& cfg) {
  if (!cfg.run_id.empty()) return sanitize_file_stem(cfg.run_id);
  return cfg.policy + "-seed" + std::to_string(cfg.seed);
}

std::string sanitize_file_stem(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    out += ok ? c : '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

corpus::Corpus load_corpus(const std::string& tasks_dir) {
  if (tasks_dir.empty()) return corpus::builtin();
  if (!fs::is_directory(tasks_dir)) throw ConfigError("tasks directory '" + tasks_dir + "' does not exist");
  return corpus::load_corpus_dir(tasks_dir);
}

// ---------------------------------------------------------------------------
// validate

std::vector<std::string> validate_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("tasks directory '" + dir.string() + "' does not exist");
  const fs::path root = corpus::tasks_root(dir);
  const auto steps = envsim::default_step_registry();
  const auto evaluators = evaluate::default_evaluator_registry();
  const auto getters = evaluate::default_getter_registry();
  std::vector<std::string> lines;
  for (const auto& file : files_with_ext(root, ".json", true)) {
    const std::string rel = fs::relative(file, root).generic_string();
    try {
      auto spec = taskspec::parse_task(read_text(file));
      for (const auto& f : taskspec::validate(spec, steps, evaluators, getters).findings) {
        lines.push_back(rel + ":" + f.key_path + ": " + f.message);
      }
    } catch (const taskspec::SchemaError& e) {
      // what() already starts with the key path
      lines.push_back(rel + ":" + e.what());
    } catch (const Error& e) {
      lines.push_back(rel + ":: " + e.what());
    }
  }
  return lines;
}

int cmd_validate(const fs::path& dir, std::ostream& out) {
  auto lines = validate_dir(dir);
  for (const auto& l : lines) out << l << "\n";
  return lines.empty() ? kExitOk : kExitFindings;
}

// ---------------------------------------------------------------------------
// run

RunFiles cmd_run(const RunConfig& cfg, std::ostream& out) {
  check_config(cfg);
  const auto c = load_corpus(cfg.tasks_dir);
  orchestrate::RunOptions options;
  options.workers = cfg.workers;
  options.seed = cfg.seed;
  options.t_max = cfg.t_max;
  options.detector = cfg.detector;
  options.endpoints = cfg.bridges;

  const auto started = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  RunFiles files;
  files.output = orchestrate::run_suite(c.suite, c.assets, make_policies(cfg, c), options);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  files.dir = fs::path(cfg.out_dir) / "results" / effective_run_id(cfg);
  fs::create_directories(files.dir);
  // Stale transcripts from an earlier run with a different suite would
  // otherwise leak into `report`.
  for (const auto& old : files_with_ext(files.dir, ".jsonl", false)) fs::remove(old);

  for (const auto& r : files.output.results) {
    const auto* task = c.suite.find(r.task_id);
    write_text(files.dir / (sanitize_file_stem(r.task_id) + ".jsonl"),
               agent::transcript_jsonl(r, orchestrate::episode_config(options, r.task_id), task));
  }
  const std::string table = orchestrate::render_rate_table(files.output.report);
  write_text(files.dir / "report.json", orchestrate::report_json(files.output.report).dump(2) + "\n");
  write_text(files.dir / "table.txt", table);
  json meta{{"started_at", started}, {"wall_seconds", wall}, {"timing", orchestrate::timing_json(files.output.report)}};
  write_text(files.dir / "run_meta.json", meta.dump(2) + "\n");
  out << table;
  out << "results: " << files.dir.string() << "\n";
  return files;
}

// ---------------------------------------------------------------------------
// replay

ReplayVerdict replay_file(const fs::path& transcript, const std::string& tasks_dir) {
  const std::string text = read_text(transcript);
  auto [cfg, result] = agent::parse_transcript_jsonl(text);
  const auto c = load_corpus(tasks_dir);
  std::optional<taskspec::TaskSpec> task = agent::transcript_task(text);
  if (!task) {
    const auto* found = c.suite.find(result.task_id);
    if (!found) throw corpus::UnknownTask("task '" + result.task_id + "' is not in the corpus");
    task = *found;
  }
  ReplayVerdict v;
  v.task_id = result.task_id;
  v.logged = result.final_digest;
  v.replayed = envsim::snapshot_digest(agent::replay_transcript(*c.assets, *task, cfg, result.transcript));
  return v;
}

int cmd_replay(const fs::path& transcript, const std::string& tasks_dir, std::ostream& out) {
  auto v = replay_file(transcript, tasks_dir);
  out << "task: " << v.task_id << "\n";
  out << "logged:   " << v.logged << "\n";
  out << "replayed: " << v.replayed << "\n";
  out << "verdict: " << (v.match() ? "match" : "mismatch") << "\n";
  return v.match() ? kExitOk : kExitFindings;
}

// ---------------------------------------------------------------------------
// report

orchestrate::RunReport report_from_dir(const fs::path& results_dir, const std::string& tasks_dir) {
  if (!fs::is_directory(results_dir)) throw MissingResults("no results directory at " + results_dir.string());
  auto paths = files_with_ext(results_dir, ".jsonl", false);
  if (paths.empty()) throw MissingResults("no transcripts under " + results_dir.string());
  std::vector<agent::EpisodeResult> results;
  std::vector<taskspec::TaskSpec> tasks;
  std::optional<corpus::Corpus> fallback;
  for (const auto& p : paths) {
    const std::string text = read_text(p);
    auto parsed = agent::parse_transcript_jsonl(text);
    auto task = agent::transcript_task(text);
    if (!task) {
      if (!fallback) fallback = load_corpus(tasks_dir);
      const auto* found = fallback->suite.find(parsed.second.task_id);
      if (!found) throw corpus::UnknownTask("task '" + parsed.second.task_id + "' is not in the corpus");
      task = *found;
    }
    tasks.push_back(std::move(*task));
    results.push_back(std::move(parsed.second));
  }
  auto suite = taskspec::make_suite(std::move(tasks));
  return orchestrate::aggregate(results, suite);
}

std::string render_report(const orchestrate::RunReport& report, const orchestrate::HumanBaseline* human) {
  std::string out = orchestrate::render_rate_table(report, human);
  if (human) out += "\n" + orchestrate::render_human_stats(*human);
  return out;
}

// ---------------------------------------------------------------------------
// entry point

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Windows agent arena harness"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string tasks_dir;
  std::string path_arg;
  std::string human_path;
  bool with_human = false;
  std::string host = "127.0.0.1";
  int port = 8765;

  auto add_tasks = [&](CLI::App* sub) {
    sub->add_option("--tasks", tasks_dir, "exported corpus or task directory (default: embedded corpus)")
        ->envname("ARENA_TASKS");
  };

  auto* validate = app.add_subcommand("validate", "validate every task file in a directory");
  validate->add_option("--tasks", tasks_dir, "task directory")->envname("ARENA_TASKS")->required();

  auto* run = app.add_subcommand("run", "run the suite and write transcripts and reports");
  add_tasks(run);
  run->add_option("--policy", cfg.policy, "scripted | random | remote")
      ->envname("ARENA_POLICY")
      ->check(CLI::IsMember({"scripted", "random", "remote"}));
  run->add_option("--endpoint", cfg.endpoint, "remote policy URL")->envname("ARENA_ENDPOINT");
  run->add_option("--workers", cfg.workers, "parallel workers")->envname("ARENA_WORKERS");
  run->add_option("--max-steps", cfg.t_max, "step budget per episode")->envname("ARENA_MAX_STEPS");
  run->add_option("--seed", cfg.seed, "run seed")->envname("ARENA_SEED");
  run->add_option("--out", cfg.out_dir, "output root")->envname("ARENA_OUT");
  run->add_option("--detector-profile", cfg.detector, "screen parser profile")
      ->envname("ARENA_DETECTOR_PROFILE")
      ->check(CLI::IsMember(observe::detector_profile_names()));
  run->add_option("--run-id", cfg.run_id, "results subdirectory name")->envname("ARENA_RUN_ID");
  run->add_option("--bridge", cfg.bridges, "bridge worker URL (repeatable); replaces in-process workers");

  auto* replay = app.add_subcommand("replay", "re-execute a transcript and compare digests");
  replay->add_option("transcript", path_arg, "transcript .jsonl")->required();
  add_tasks(replay);

  auto* report = app.add_subcommand("report", "render tables from a results directory");
  report->add_option("results", path_arg, "results directory")->required();
  add_tasks(report);
  report->add_flag("--human", with_human, "include the shipped human baseline");
  report->add_option("--human-baseline", human_path, "human baseline JSON")->envname("ARENA_HUMAN_BASELINE");

  auto* exporter = app.add_subcommand("export-corpus", "write the embedded corpus to a directory");
  exporter->add_option("dir", path_arg, "target directory")->required();

  auto* serve = app.add_subcommand("serve", "host a bridge server");
  add_tasks(serve);
  serve->add_option("--host", host, "bind address")->envname("ARENA_HOST");
  serve->add_option("--port", port, "bind port")->envname("ARENA_PORT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitFindings;
  }

  try {
    if (*validate) return cmd_validate(tasks_dir, out);
    if (*run) {
      cfg.tasks_dir = tasks_dir;
      cmd_run(cfg, out);
      return kExitOk;
    }
    if (*replay) return cmd_replay(path_arg, tasks_dir, out);
    if (*report) {
      auto rep = report_from_dir(path_arg, tasks_dir);
      std::optional<orchestrate::HumanBaseline> human;
      if (!human_path.empty()) {
        human = orchestrate::load_human_baseline(human_path);
      } else if (with_human) {
        human = orchestrate::load_human_baseline(orchestrate::default_human_baseline_path());
      }
      out << render_report(rep, human ? &*human : nullptr);
      return kExitOk;
    }
    if (*exporter) {
      corpus::export_corpus(corpus::builtin(), path_arg);
      out << "exported " << corpus::builtin().suite.tasks.size() << " tasks to " << path_arg << "\n";
      return kExitOk;
    }
    if (*serve) {
      auto c = load_corpus(tasks_dir);
      orchestrate::BridgeServer server(c.assets);
      out << "serving " << orchestrate::kBridgeProtocol << " on " << host << ":" << port << std::endl;
      server.serve(host, port);
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFindings;
  } catch (const taskspec::SuiteLoadError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& [file, msg] : e.failures()) err << file << ": " << msg << "\n";
    return kExitFindings;
  } catch (const Error& e) {
    err << e.kind() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace arena::cli
