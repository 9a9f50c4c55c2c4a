#include "doctest.h"

#include <atomic>

#include "arena/corpus.hpp"
#include "arena/orchestrate.hpp"
#include "support.hpp"

using namespace arena;
using namespace arena::orchestrate;

namespace {

const corpus::Corpus& C() { return corpus::builtin(); }

agent::PolicyFactory random_policies() {
  return [](const taskspec::TaskSpec&, std::uint64_t seed) { return std::make_unique<agent::RandomPolicy>(seed); };
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, '|');) out.push_back(trim(c));
  return out;
}

std::string line_starting(const std::string& text, const std::string& head) {
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) {
    if (l.rfind(head, 0) == 0) return l;
  }
  return "";
}

/// Worker that loses its connection on selected tasks.
class FlakyWorker : public Worker {
 public:
  FlakyWorker(std::shared_ptr<const agent::EnvAssets> assets, std::function<bool(const std::string&)> dies)
      : inner_(std::move(assets)), dies_(std::move(dies)) {}
  agent::EpisodeResult run(const taskspec::TaskSpec& task, agent::Policy& p, const agent::EpisodeConfig& cfg) override {
    ++calls;
    if (dies_(task.id)) throw WorkerDead("connection reset");
    return inner_.run(task, p, cfg);
  }
  std::string name() const override { return "flaky"; }
  std::atomic<int> calls{0};

 private:
  InProcessWorker inner_;
  std::function<bool(const std::string&)> dies_;
};

}  // namespace

TEST_CASE("partition is round-robin and balanced") {
  support::Gen g(21);
  for (int round = 0; round < 500; ++round) {
    const std::size_t n = g.below(501), w = 1 + g.below(64);
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("t" + std::to_string(i));
    auto p = partition(ids, w);
    REQUIRE(p.assignments.size() == w);
    std::size_t lo = n, hi = 0, total = 0;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < w; ++k) {
      lo = std::min(lo, p.assignments[k].size());
      hi = std::max(hi, p.assignments[k].size());
      total += p.assignments[k].size();
      for (std::size_t j = 0; j < p.assignments[k].size(); ++j) {
        CHECK(p.assignments[k][j] == ids[k + j * w]);
        seen.insert(p.assignments[k][j]);
      }
    }
    CHECK(total == n);
    CHECK(seen.size() == n);
    CHECK(hi - lo <= 1);
  }
  std::vector<std::string> ids(154, "x");
  auto p = partition(ids, 40);
  std::size_t fours = 0, threes = 0;
  for (const auto& a : p.assignments) (a.size() == 4 ? fours : threes) += 1;
  CHECK(fours == 34);
  CHECK(threes == 6);
  CHECK_THROWS_AS(partition(ids, 0), std::invalid_argument);
}

TEST_CASE("results do not depend on the number of workers") {
  for (auto policies : {corpus::oracle_policies(C()), random_policies()}) {
    RunOptions o;
    o.seed = 11;
    o.detector = "noisy";
    const std::string base = report_json(run_suite(C().suite, C().assets, policies, o).report).dump();
    for (std::size_t w : {2, 4, 8}) {
      o.workers = w;
      auto out = run_suite(C().suite, C().assets, policies, o);
      CHECK(report_json(out.report).dump() == base);
      CHECK(out.results.size() == C().suite.tasks.size());
      for (std::size_t i = 0; i < out.results.size(); ++i) CHECK(out.results[i].task_id == C().suite.tasks[i].id);
    }
  }
}

TEST_CASE("episode seeds derive from the run seed and task id") {
  RunOptions o;
  o.seed = 5;
  CHECK(episode_config(o, "a").seed == derive_seed(5, "a"));
  CHECK(episode_config(o, "a").seed != episode_config(o, "b").seed);
}

TEST_CASE("a dead worker's tasks are requeued") {
  RunOptions o;
  o.seed = 3;
  const auto policies = corpus::oracle_policies(C());
  const std::string base = report_json(run_suite(C().suite, C().assets, policies, o).report).dump();

  std::vector<std::unique_ptr<Worker>> workers;
  workers.push_back(std::make_unique<InProcessWorker>(C().assets));
  auto* flaky = new FlakyWorker(C().assets, [](const std::string&) { return true; });
  workers.emplace_back(flaky);
  workers.push_back(std::make_unique<InProcessWorker>(C().assets));
  auto out = run_suite_with(C().suite, workers, policies, o);
  CHECK(flaky->calls == 1);  // marked dead after the first loss
  CHECK(report_json(out.report).dump() == base);

  // a task that kills every worker it touches is recorded as errored
  const std::string poison = C().suite.tasks[0].id;
  std::vector<std::unique_ptr<Worker>> all;
  for (int i = 0; i < 3; ++i) {
    all.push_back(std::make_unique<FlakyWorker>(C().assets, [&](const std::string& id) { return id == poison; }));
  }
  auto out2 = run_suite_with(C().suite, all, policies, o);
  const auto& s = out2.report.per_task.at(poison);
  CHECK(s.errored);
  CHECK(s.termination == "ERROR");
  CHECK_FALSE(s.success);
  std::size_t ok = 0;
  for (const auto& [id, t] : out2.report.per_task) ok += t.success;
  CHECK(ok == C().suite.tasks.size() - 1);
}

TEST_CASE("bridge workers match in-process workers") {
  BridgeServer a(C().assets), b(C().assets);
  const int pa = a.start(), pb = b.start();
  BridgeWorker probe("http://127.0.0.1:" + std::to_string(pa));
  CHECK(probe.probe().protocol_version == kBridgeProtocol);

  for (auto policies : {corpus::oracle_policies(C()), random_policies()}) {
    RunOptions o;
    o.seed = 8;
    o.t_max = 8;
    const std::string local = report_json(run_suite(C().suite, C().assets, policies, o).report).dump();
    o.endpoints = {"http://127.0.0.1:" + std::to_string(pa), "http://127.0.0.1:" + std::to_string(pb) + "/"};
    auto remote = run_suite(C().suite, C().assets, policies, o);
    CHECK(report_json(remote.report).dump() == local);
  }
  a.stop();
  b.stop();
  BridgeWorker gone("http://127.0.0.1:" + std::to_string(pa), 500);
  CHECK_THROWS_AS(gone.probe(), WorkerDead);
}

TEST_CASE("aggregation matches a recount") {
  support::Gen g(44);
  const auto& suite = C().suite;
  for (int round = 0; round < 300; ++round) {
    std::vector<agent::EpisodeResult> results;
    std::map<std::string, std::pair<std::size_t, std::size_t>> want;  // column -> (succ, attempts)
    std::size_t succ = 0, steps = 0;
    for (const auto& t : suite.tasks) {
      if (g.coin(0.2)) continue;
      agent::EpisodeResult r;
      r.task_id = t.id;
      r.steps = g.below(20);
      r.errored = g.coin(0.1);
      const bool cont = g.coin(0.3);
      const double v = cont ? g.uni(0, 1) : double(g.below(2));
      r.reward = cont ? evaluate::Reward::continuous(v, "") : evaluate::Reward::binary(v == 1.0, "");
      const bool ok = !r.errored && (cont ? v >= 0.5 : v == 1.0);
      auto& w = want[std::string(report_column(*t.domain))];
      w.second += 1;
      if (ok) {
        w.first += 1;
        ++succ;
        steps += r.steps;
      }
      results.push_back(r);
    }
    auto rep = aggregate(results, suite);
    CHECK(rep.overall.attempts == results.size());
    CHECK(rep.overall.successes == succ);
    CHECK(rep.overall.success_steps == steps);
    for (const auto& [col, sa] : want) {
      CHECK(rep.per_category.at(col).successes == sa.first);
      CHECK(rep.per_category.at(col).attempts == sa.second);
    }
    CHECK(rep.per_category.size() == want.size());
  }
  agent::EpisodeResult stray;
  stray.task_id = "not-a-task";
  CHECK_THROWS_AS(aggregate({stray}, suite), UnknownTaskId);
  stray.task_id = suite.tasks[0].id;
  CHECK_THROWS_AS(aggregate({stray, stray}, suite), DuplicateResult);
}

TEST_CASE("success thresholds") {
  CHECK(is_success(evaluate::Reward::continuous(0.5, "")));
  CHECK_FALSE(is_success(evaluate::Reward::continuous(0.4999, "")));
  CHECK(is_success(evaluate::Reward::binary(true, "")));
  CHECK_FALSE(is_success(evaluate::Reward{0.9, evaluate::RewardKind::binary, ""}));
}

TEST_CASE("human baseline tables") {
  auto h = load_human_baseline(default_human_baseline_path());
  const std::array<double, 7> cols = {75.8, 76.7, 83.3, 68.4, 42.8, 91.7, 74.5};
  CHECK(h.column_rates == cols);
  REQUIRE(h.rows.size() == 7);
  CHECK(h.rows[0].domain == "LibreOffice Calc");
  CHECK(h.rows[0].avg_steps == 15.3);
  CHECK(h.rows[4].success_pct == 42.8);
  CHECK(h.overall.avg_steps == 8.1);
  CHECK(h.overall.difficulty == 1.9);

  auto rep = run_suite(C().suite, C().assets, corpus::oracle_policies(C()), RunOptions{}).report;
  const std::string table = render_rate_table(rep, &h);
  CHECK(cells(line_starting(table, "Human")) ==
        std::vector<std::string>{"Human", "75.8%", "76.7%", "83.3%", "68.4%", "42.8%", "91.7%", "74.5%"});
  CHECK(cells(line_starting(table, "Agent")).back() == "100.0%");
  CHECK(cells(line_starting(table, "Run")).size() == 8);

  const std::string stats = render_human_stats(h);
  CHECK(cells(line_starting(stats, "Overall")) == std::vector<std::string>{"Overall", "8.1", "74.5%", "1.9"});
  CHECK(cells(line_starting(stats, "VLC Player")) == std::vector<std::string>{"VLC Player", "6.6", "42.8%", "2.4"});

  CHECK_THROWS_AS(parse_human_baseline(json::object()), BaselineError);
  CHECK_THROWS_AS(load_human_baseline("/nonexistent/h.json"), BaselineError);
}

TEST_CASE("rate table shows dashes for empty columns") {
  RunReport empty;
  auto line = cells(line_starting(render_rate_table(empty), "Agent"));
  CHECK(line == std::vector<std::string>{"Agent", "-", "-", "-", "-", "-", "-", "0.0%"});
}
