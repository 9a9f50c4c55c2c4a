#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "arena/corpus.hpp"
#include "arena/orchestrate.hpp"

using namespace arena;
using namespace arena::corpus;
namespace fs = std::filesystem;

namespace {

const Corpus& C() { return builtin(); }

fs::path fresh_dir(const std::string& name) {
  fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Average human step counts per app, rounded up, used as a ceiling for the
// hand-written solutions.
std::size_t step_ceiling(const std::string& id) {
  const std::vector<std::pair<std::string, std::size_t>> by_prefix = {
      {"calc-", 16},    {"writer-", 9}, {"settings-", 7}, {"explorer-", 7}, {"notepad-", 12},
      {"clock-", 12},   {"vlc-", 7},    {"8ba5ae7a", 7},  {"vscode-", 5},   {"edge-", 6},
  };
  for (const auto& [p, n] : by_prefix) {
    if (id.rfind(p, 0) == 0) return n;
  }
  FAIL("no ceiling for " << id);
  return 0;
}

}  // namespace

TEST_CASE("coverage of domains, feasibility and reward kinds") {
  std::map<taskspec::Domain, std::size_t> per_domain;
  std::size_t infeasible = 0, continuous = 0;
  for (const auto& t : C().suite.tasks) {
    REQUIRE(t.domain);
    ++per_domain[*t.domain];
    infeasible += !t.feasible;
    continuous += evaluate::evaluators().at(t.evaluator.func).contract.continuous;
  }
  for (auto d : taskspec::kAllDomains) CHECK_MESSAGE(per_domain[d] >= 2, taskspec::domain_name(d));
  CHECK(infeasible >= 1);
  CHECK(continuous >= 1);
  CHECK(C().manifest.size() == C().suite.tasks.size());
}

TEST_CASE("every task validates against the shipped registries") {
  auto steps = envsim::default_step_registry();
  auto evs = evaluate::default_evaluator_registry();
  auto getters = evaluate::default_getter_registry();
  for (const auto& t : C().suite.tasks) {
    auto rep = taskspec::validate(t, steps, evs, getters);
    CHECK_MESSAGE(rep.ok(), t.id);
  }
}

TEST_CASE("published instructions are kept verbatim") {
  CHECK(C().suite.find("8ba5ae7a-5ae5-4eab-9fcc-5dd4fe3abf89-W0S")->instruction ==
        "Help me modify the folder used to store my recordings to the Desktop");
  const auto* amazon = C().suite.find("edge-clear-amazon-cookies");
  REQUIRE(amazon);
  CHECK(amazon->instruction ==
        "Can you help me clean up my computer by getting rid of all the tracking things that Amazon might have "
        "saved? I want to make sure my browsing is private and those sites don't remember me.");
  CHECK(amazon->evaluator.func == "is_cookie_deleted");
  CHECK(amazon->evaluator.expected.rules == json{{"domains", {"amazon.com"}}});
}

TEST_CASE("oracle solutions reach full reward within human step counts") {
  for (const auto& t : C().suite.tasks) {
    const auto& script = oracle_script(C(), t.id);
    CHECK_MESSAGE(script.size() <= step_ceiling(t.id), t.id);
    agent::ScriptedPolicy p(script);
    auto r = agent::run_episode(C().assets, t, p, agent::EpisodeConfig{});
    CHECK_MESSAGE(r.reward.value == 1.0, t.id << ": " << r.reward.detail);
    CHECK(r.steps == script.size());
    if (!t.feasible) CHECK(r.outcome.termination == evaluate::Termination::FAIL);
  }
  CHECK_THROWS_AS(oracle_script(C(), "nope"), UnknownTask);
}

TEST_CASE("doing nothing earns nothing") {
  for (const auto& t : C().suite.tasks) {
    agent::ScriptedPolicy done({"```decision\nDONE\n```"});
    auto r = agent::run_episode(C().assets, t, done, agent::EpisodeConfig{});
    CHECK_MESSAGE(r.reward.value < 0.5, t.id);
  }
}

TEST_CASE("random actions rarely succeed") {
  double total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    orchestrate::RunOptions o;
    o.seed = seed;
    auto out = orchestrate::run_suite(
        C().suite, C().assets,
        [](const taskspec::TaskSpec&, std::uint64_t s) { return std::make_unique<agent::RandomPolicy>(s); }, o);
    total += out.report.overall.rate();
  }
  CHECK(total / 20 <= 0.10);
}

TEST_CASE("export and reload") {
  const fs::path dir = fresh_dir("arena_corpus_export");
  export_corpus(C(), dir);
  CHECK(tasks_root(dir) == dir / "tasks");
  CHECK(tasks_root(dir / "tasks") == dir / "tasks");

  // independent count of the "domain" field over the task files
  std::map<std::string, std::size_t> counted;
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "tasks")) {
    if (e.path().extension() != ".json") continue;
    ++files;
    ++counted[json::parse(slurp(e.path())).at("domain").get<std::string>()];
  }
  CHECK(files == C().suite.tasks.size());
  std::string index;
  for (const auto& [d, n] : counted) index += d + "=" + std::to_string(n) + "\n";
  CHECK(slurp(dir / "tasks" / "suite.txt") == index);
  for (const auto& [d, n] : counted) CHECK(C().suite.categories.at(d) == n);

  auto back = load_corpus_dir(dir);
  REQUIRE(back.suite.tasks.size() == C().suite.tasks.size());
  for (std::size_t i = 0; i < back.suite.tasks.size(); ++i) CHECK(back.suite.tasks[i] == C().suite.tasks[i]);
  CHECK(back.oracles == C().oracles);
  CHECK(manifest_json(back) == manifest_json(C()));

  auto a = orchestrate::run_suite(C().suite, C().assets, oracle_policies(C()), {});
  auto b = orchestrate::run_suite(back.suite, back.assets, oracle_policies(back), {});
  CHECK(orchestrate::report_json(a.report) == orchestrate::report_json(b.report));
  CHECK(a.report.overall.rate() == 1.0);

  // golden digests are enforced
  const auto& entry = *std::find_if(C().manifest.begin(), C().manifest.end(),
                                    [](const ManifestEntry& m) { return !m.golden.empty(); });
  const fs::path golden = dir / "golden" / entry.task_id / entry.golden.begin()->first;
  REQUIRE(fs::exists(golden));
  CHECK(sha256_hex(slurp(golden)) == entry.golden.begin()->second);
  std::ofstream(golden, std::ios::binary | std::ios::app) << "tampered";
  CHECK_THROWS_AS(load_corpus_dir(dir), CorpusError);
  fs::remove(golden);
  CHECK_THROWS_AS(load_corpus_dir(dir), CorpusError);
  fs::remove_all(dir);
}

TEST_CASE("manifest entries") {
  std::size_t adapted = 0;
  for (const auto& m : C().manifest) {
    const auto* t = C().suite.find(m.task_id);
    REQUIRE(t);
    CHECK(m.feasible == t->feasible);
    CHECK(m.domain == taskspec::domain_name(*t->domain));
    if (m.adapted) {
      ++adapted;
      CHECK_FALSE(m.note.empty());
    }
  }
  CHECK(adapted >= 1);
}
