#include "arena/orchestrate.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>

namespace arena::orchestrate {

Partition partition(const std::vector<std::string>& task_ids, std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("partition needs at least one worker");
  Partition p;
  p.assignments.resize(workers);
  for (std::size_t i = 0; i < task_ids.size(); ++i) p.assignments[i % workers].push_back(task_ids[i]);
  return p;
}

std::string_view worker_status_name(WorkerStatus s) {
  switch (s) {
    case WorkerStatus::idle: return "idle";
    case WorkerStatus::busy: return "busy";
    case WorkerStatus::dead: return "dead";
  }
  return "";
}

agent::EpisodeResult InProcessWorker::run(const taskspec::TaskSpec& task, agent::Policy& policy,
                                          const agent::EpisodeConfig& cfg) {
  return agent::run_episode(assets_, task, policy, cfg);
}

agent::EpisodeConfig episode_config(const RunOptions& o, const std::string& task_id) {
  agent::EpisodeConfig c;
  c.t_max = o.t_max;
  c.n_history = o.n_history;
  c.detector = o.detector;
  c.wait_limit = o.wait_limit;
  c.seed = derive_seed(o.seed, task_id);
  return c;
}

std::string_view report_column(taskspec::Domain d) {
  switch (d) {
    case taskspec::Domain::office: return kReportColumns[0];
    case taskspec::Domain::web_browsing: return kReportColumns[1];
    case taskspec::Domain::windows_system: return kReportColumns[2];
    case taskspec::Domain::coding: return kReportColumns[3];
    case taskspec::Domain::media_video: return kReportColumns[4];
    case taskspec::Domain::windows_utilities: return kReportColumns[5];
  }
  return "";
}

bool is_success(const evaluate::Reward& r) {
  return r.kind == evaluate::RewardKind::continuous ? r.value >= 0.5 : r.value == 1.0;
}

RunReport aggregate(const std::vector<agent::EpisodeResult>& results, const taskspec::TaskSuite& suite) {
  RunReport rep;
  for (const auto& r : results) {
    const auto* task = suite.find(r.task_id);
    if (!task) throw UnknownTaskId("result for unknown task '" + r.task_id + "'");
    if (rep.per_task.count(r.task_id)) throw DuplicateResult("task '" + r.task_id + "' reported twice");
    TaskSummary s;
    s.task_id = r.task_id;
    s.category = task->domain ? std::string(report_column(*task->domain)) : "Other";
    s.reward = r.reward.value;
    s.continuous = r.reward.kind == evaluate::RewardKind::continuous;
    s.success = !r.errored && is_success(r.reward);
    s.steps = r.steps;
    s.termination = r.errored ? "ERROR" : std::string(evaluate::termination_name(r.outcome.termination));
    s.final_digest = r.final_digest;
    s.errored = r.errored;
    s.error = r.error;
    for (CategoryStats* c : {&rep.per_category[s.category], &rep.overall}) {
      ++c->attempts;
      if (s.success) {
        ++c->successes;
        c->success_steps += s.steps;
      }
    }
    rep.per_task.emplace(r.task_id, std::move(s));
  }
  return rep;
}

namespace {

json stats_json(const CategoryStats& c) {
  return json{{"successes", c.successes},
              {"attempts", c.attempts},
              {"success_rate", c.rate()},
              {"avg_steps_success", c.avg_steps()}};
}

}  // namespace

json report_json(const RunReport& r) {
  json tasks = json::object();
  for (const auto& [id, s] : r.per_task) {
    json t{{"category", s.category}, {"reward", s.reward},       {"continuous", s.continuous},
           {"success", s.success},   {"steps", s.steps},         {"termination", s.termination},
           {"final_digest", s.final_digest}, {"errored", s.errored}};
    if (s.errored) t["error"] = s.error;
    tasks[id] = std::move(t);
  }
  json cats = json::object();
  for (const auto& [name, c] : r.per_category) cats[name] = stats_json(c);
  return json{{"per_task", tasks}, {"per_category", cats}, {"overall", stats_json(r.overall)}};
}

json timing_json(const RunReport& r) {
  json j = json::object();
  for (const auto& [w, s] : r.timing) j[w] = s;
  return json{{"wall_seconds", j}};
}

// ---------------------------------------------------------------------------
// Scheduling

namespace {

agent::EpisodeResult errored_result(const std::string& id, std::uint64_t seed, const std::string& why) {
  agent::EpisodeResult r;
  r.task_id = id;
  r.seed = seed;
  r.reward = evaluate::Reward::binary(false, "errored");
  r.errored = true;
  r.error = why;
  return r;
}

struct Scheduler {
  const taskspec::TaskSuite& suite;
  std::vector<std::unique_ptr<Worker>>& workers;
  const agent::PolicyFactory& policies;
  const RunOptions& options;

  std::mutex mu;
  std::map<std::string, agent::EpisodeResult> results;
  std::vector<std::string> requeue;
  std::set<std::string> lost_once;  // tasks that were in flight on a dead worker
  std::vector<bool> alive;
  std::map<std::string, double> timing;

  void drive(std::size_t w, const std::vector<std::string>& ids) {
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t k = 0; k < ids.size(); ++k) {
      const auto& id = ids[k];
      const auto& task = *suite.find(id);
      const auto cfg = episode_config(options, id);
      agent::EpisodeResult r;
      try {
        auto policy = policies(task, cfg.seed);
        r = workers[w]->run(task, *policy, cfg);
      } catch (const WorkerDead& e) {
        std::lock_guard lock(mu);
        alive[w] = false;
        if (lost_once.count(id)) {
          results[id] = errored_result(id, cfg.seed, std::string("worker died twice: ") + e.what());
        } else {
          lost_once.insert(id);
          requeue.push_back(id);
        }
        for (std::size_t rest = k + 1; rest < ids.size(); ++rest) requeue.push_back(ids[rest]);
        break;
      } catch (const std::exception& e) {
        r = errored_result(id, cfg.seed, e.what());
      }
      std::lock_guard lock(mu);
      results[id] = std::move(r);
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard lock(mu);
    timing[workers[w]->name() + "#" + std::to_string(w)] += secs;
  }

  void round(const std::vector<std::vector<std::string>>& assignment) {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < assignment.size(); ++w) {
      if (assignment[w].empty()) continue;
      if (threads.empty() && assignment.size() == 1) {
        drive(w, assignment[w]);
        return;
      }
      threads.emplace_back([this, w, &assignment] { drive(w, assignment[w]); });
    }
    for (auto& t : threads) t.join();
  }

  void run() {
    alive.assign(workers.size(), true);
    round(partition(suite.ids(), workers.size()).assignments);
    while (!requeue.empty()) {
      std::vector<std::string> pending;
      pending.swap(requeue);
      std::vector<std::size_t> live;
      for (std::size_t w = 0; w < workers.size(); ++w) {
        if (alive[w]) live.push_back(w);
      }
      if (live.empty()) {
        for (const auto& id : pending) {
          results[id] = errored_result(id, derive_seed(options.seed, id), "no live workers");
        }
        break;
      }
      std::vector<std::vector<std::string>> assignment(workers.size());
      auto parts = partition(pending, live.size());
      for (std::size_t i = 0; i < live.size(); ++i) assignment[live[i]] = parts.assignments[i];
      round(assignment);
    }
  }
};

}  // namespace

RunOutput run_suite_with(const taskspec::TaskSuite& suite, std::vector<std::unique_ptr<Worker>>& workers,
                         const agent::PolicyFactory& policies, const RunOptions& options) {
  if (workers.empty()) throw std::invalid_argument("run_suite needs at least one worker");
  Scheduler s{suite, workers, policies, options};
  s.run();
  RunOutput out;
  for (const auto& id : suite.ids()) out.results.push_back(std::move(s.results.at(id)));
  out.report = aggregate(out.results, suite);
  out.report.timing = std::move(s.timing);
  return out;
}

RunOutput run_suite(const taskspec::TaskSuite& suite, std::shared_ptr<const agent::EnvAssets> assets,
                    const agent::PolicyFactory& policies, const RunOptions& options) {
  std::vector<std::unique_ptr<Worker>> workers;
  if (!options.endpoints.empty()) {
    for (const auto& url : options.endpoints) workers.push_back(std::make_unique<BridgeWorker>(url));
  } else {
    const std::size_t n = std::max<std::size_t>(1, options.workers);
    for (std::size_t i = 0; i < n; ++i) workers.push_back(std::make_unique<InProcessWorker>(assets));
  }
  return run_suite_with(suite, workers, policies, options);
}

// ---------------------------------------------------------------------------
// Tables

namespace {

std::string pad_right(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }
std::string pad_left(const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; }

/// First column left-aligned, the rest right-aligned, joined with " | ".
std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += " | ";
      line += c == 0 ? pad_right(rows[r][c], width[c]) : pad_left(rows[r][c], width[c]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
    if (r == 0) {
      std::string rule;
      for (std::size_t c = 0; c < width.size(); ++c) {
        if (c) rule += "-+-";
        rule += std::string(width[c], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

std::string pct(double percent) { return format_fixed(percent, 1) + "%"; }

}  // namespace

std::string render_rate_table(const RunReport& report, const HumanBaseline* human,
                              const std::string& agent_label) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Run"};
  for (const char* c : kReportColumns) header.push_back(c);
  rows.push_back(header);

  std::vector<std::string> agent{agent_label};
  for (std::size_t i = 0; i + 1 < kReportColumns.size(); ++i) {
    auto it = report.per_category.find(kReportColumns[i]);
    agent.push_back(it == report.per_category.end() || it->second.attempts == 0 ? "-"
                                                                                 : pct(it->second.rate() * 100));
  }
  agent.push_back(pct(report.overall.rate() * 100));
  rows.push_back(agent);

  if (human) {
    std::vector<std::string> h{"Human"};
    for (double v : human->column_rates) h.push_back(pct(v));
    rows.push_back(h);
  }
  return render_grid(rows);
}

std::string render_human_stats(const HumanBaseline& human) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"Task Domain", "Avg. # Steps", "Avg. Succ. Rate", "Avg. Difficulty"});
  auto row = [](const HumanDomainRow& r) {
    return std::vector<std::string>{r.domain, format_fixed(r.avg_steps, 1), pct(r.success_pct),
                                    format_fixed(r.difficulty, 1)};
  };
  for (const auto& r : human.rows) rows.push_back(row(r));
  rows.push_back(row(human.overall));
  return render_grid(rows);
}

// ---------------------------------------------------------------------------
// Human baseline fixture

namespace {

HumanDomainRow parse_row(const json& j, const std::string& where) {
  try {
    HumanDomainRow r;
    r.domain = j.at("domain").get<std::string>();
    r.avg_steps = j.at("avg_steps").get<double>();
    r.success_pct = j.at("success_pct").get<double>();
    r.difficulty = j.at("difficulty").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw BaselineError(where + ": " + e.what());
  }
}

}  // namespace

HumanBaseline parse_human_baseline(const json& j) {
  HumanBaseline h;
  if (!j.is_object() || !j.contains("columns") || !j.contains("domains") || !j.contains("overall")) {
    throw BaselineError("baseline needs 'columns', 'domains' and 'overall'");
  }
  const auto& cols = j.at("columns");
  for (std::size_t i = 0; i < kReportColumns.size(); ++i) {
    if (!cols.contains(kReportColumns[i]) || !cols.at(kReportColumns[i]).is_number()) {
      throw BaselineError(std::string("columns: missing numeric '") + kReportColumns[i] + "'");
    }
    h.column_rates[i] = cols.at(kReportColumns[i]).get<double>();
  }
  if (!j.at("domains").is_array()) throw BaselineError("domains must be an array");
  for (std::size_t i = 0; i < j.at("domains").size(); ++i) {
    h.rows.push_back(parse_row(j.at("domains")[i], "domains[" + std::to_string(i) + "]"));
  }
  h.overall = parse_row(j.at("overall"), "overall");
  return h;
}

HumanBaseline load_human_baseline(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw BaselineError("cannot read " + file.string());
  try {
    return parse_human_baseline(json::parse(in));
  } catch (const json::parse_error& e) {
    throw BaselineError(file.string() + ": " + e.what());
  }
}

std::filesystem::path default_human_baseline_path() {
  return std::filesystem::path(ARENA_DATA_DIR) / "human_baseline.json";
}

}  // namespace arena::orchestrate
