// Acceptance runner: prints PASS/FAIL for criteria 1-10 and exits non-zero
// when any criterion that this host can evaluate fails.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "arena/cli.hpp"
#include "arena/corpus.hpp"
#include "arena/orchestrate.hpp"
#include "support.hpp"

using namespace arena;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
  bool host_limited = false;  // needs resources this host does not have
};

const corpus::Corpus& C() { return corpus::builtin(); }

agent::PolicyFactory random_policies() {
  return [](const taskspec::TaskSpec&, std::uint64_t seed) { return std::make_unique<agent::RandomPolicy>(seed); };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string c; std::getline(in, c, '|');) out.push_back(trim(c));
  return out;
}

// 1 ------------------------------------------------------------------------
Verdict oracle_completeness() {
  const auto t0 = std::chrono::steady_clock::now();
  auto out = orchestrate::run_suite(C().suite, C().assets, corpus::oracle_policies(C()), {});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::size_t exact = 0;
  std::string bad;
  for (const auto& r : out.results) {
    if (r.reward.value == 1.0) ++exact;
    else bad += " " + r.task_id;
  }
  const bool ok = exact == out.results.size() && out.report.overall.rate() == 1.0 && secs < 10.0;
  return {ok, std::to_string(exact) + "/" + std::to_string(out.results.size()) + " tasks at 1.0, overall " +
                  format_fixed(out.report.overall.rate() * 100, 1) + "%, " + format_fixed(secs, 3) + " s" + bad};
}

// 2 ------------------------------------------------------------------------
json typed_input(support::Gen& g, const std::string& func, json& rules, std::string& golden) {
  auto marked = [&] {
    std::string s;
    for (std::size_t k = 0; k < g.below(5); ++k) s += g.coin() ? "<hl>" + g.utf8(4) + "</hl>" : g.utf8(4);
    if (g.coin(0.05)) s += "<hl>";  // occasionally malformed
    return s;
  };
  golden = g.coin() ? g.utf8() : marked();
  const std::vector<std::string> hosts = {"amazon.com", "www.amazon.com", "bing.com", "example.org"};
  if (func == "vis_vlc_recordings_folder") {
    rules = {{"recording_file_path", g.word()}};
    json v = json::object();
    if (g.coin(0.8)) v["recording_file_path"] = g.coin(0.3) ? rules["recording_file_path"] : json(g.word());
    if (g.coin(0.1)) v["recording_file_path"] = 7;
    return v;
  }
  if (func == "is_cookie_deleted") {
    rules = {{"domains", json::array({hosts[g.below(4)]})}};
    json a = json::array();
    for (std::size_t k = 0; k < g.below(4); ++k) a.push_back({{"domain", hosts[g.below(4)]}, {"name", "n"}, {"value", "v"}});
    return a;
  }
  if (func == "check_json_settings") {
    json doc = json::object(), want = json::object();
    for (std::size_t k = 0; k < g.below(4); ++k) doc[g.word(2)] = int(g.below(3));
    for (std::size_t k = 0; k < 1 + g.below(2); ++k) want[g.word(2)] = int(g.below(3));
    rules = {{"expected", want}};
    return doc;
  }
  if (func == "check_file_attributes") {
    rules = json::object();
    for (const char* k : {"hidden", "readonly", "is_dir"}) {
      if (g.coin()) rules[k] = g.coin();
    }
    return {{"is_dir", g.coin()}, {"hidden", g.coin()}, {"readonly", g.coin()}};
  }
  if (func == "check_file_contains") {
    rules = {{"substring", g.word(3)}};
    return g.utf8() + g.word();
  }
  rules = json::object();
  return g.coin() ? json(marked()) : json(g.utf8());
}

Verdict reward_range() {
  support::Gen g(2718);
  std::size_t calls = 0, violations = 0, rejected = 0;
  for (const auto& [name, ev] : evaluate::evaluators()) {
    for (int i = 0; i < 2000; ++i) {
      json rules;
      std::string golden;
      json fetched = typed_input(g, name, rules, golden);
      try {
        auto r = ev.fn(evaluate::EvalInputs{fetched, rules, &golden});
        ++calls;
        const bool in_range = r.value >= 0.0 && r.value <= 1.0;
        const bool binary_ok = r.kind != evaluate::RewardKind::binary || r.value == 0.0 || r.value == 1.0;
        if (!in_range || !binary_ok) ++violations;
      } catch (const evaluate::FormatError&) {
        ++rejected;  // malformed artifact; the dispatcher scores these as zero
      }
    }
  }
  return {calls >= 10000 && violations == 0, std::to_string(calls) + " scored invocations, " +
                                                 std::to_string(violations) + " violations, " +
                                                 std::to_string(rejected) + " malformed inputs rejected"};
}

// 3 ------------------------------------------------------------------------
Verdict infeasibility() {
  using evaluate::Termination;
  std::size_t checked = 0, wrong = 0, tasks = 0;
  for (const auto& t : C().suite.tasks) {
    if (t.feasible) continue;
    ++tasks;
    auto state = envsim::reset(C().assets->catalog, 0);
    envsim::apply_config(C().assets->catalog, C().assets->fixtures, state, t.config);
    const std::vector<std::pair<evaluate::EpisodeOutcome, double>> cases = {
        {{Termination::FAIL, "infeasible"}, 1.0},
        {{Termination::FAIL, "The task is Infeasible: 7-Zip is not installed"}, 1.0},
        {{Termination::FAIL, "could not find it"}, 0.0},
        {{Termination::DONE, std::nullopt}, 0.0},
        {{Termination::WAIT_TIMEOUT, std::nullopt}, 0.0},
        {{Termination::STEP_LIMIT, std::nullopt}, 0.0},
    };
    for (const auto& [o, want] : cases) {
      ++checked;
      if (evaluate::evaluate_task(state, t, o, C().assets->golden).value != want) ++wrong;
    }
  }
  return {tasks > 0 && wrong == 0, std::to_string(tasks) + " infeasible tasks, " + std::to_string(checked) +
                                       " outcomes over 4 terminations, " + std::to_string(wrong) + " wrong"};
}

// 4 ------------------------------------------------------------------------
class FnPolicy : public agent::Policy {
 public:
  explicit FnPolicy(std::function<std::string(const agent::PromptBundle&)> f) : f_(std::move(f)) {}
  std::string decide(const agent::PromptBundle& b) override { return f_(b); }

 private:
  std::function<std::string(const agent::PromptBundle&)> f_;
};

Verdict termination_bound() {
  const std::vector<std::pair<std::string, std::function<std::string(const agent::PromptBundle&)>>> adversaries = {
      {"always-WAIT", [](const agent::PromptBundle&) { return std::string("```decision\nWAIT\n```"); }},
      {"always-malformed", [](const agent::PromptBundle&) { return std::string("I refuse to use fences."); }},
      {"infinite-COMMAND",
       [](const agent::PromptBundle&) {
         return std::string("```decision\nCOMMAND\n```\n```python\ncomputer.keyboard.press(\"tab\")\n```");
       }},
  };
  std::size_t runs = 0, wrong = 0;
  for (const auto& t : C().suite.tasks) {
    for (std::size_t t_max : {0, 1, 5, 20}) {
      for (const auto& [name, f] : adversaries) {
        FnPolicy p(f);
        agent::EpisodeConfig cfg;
        cfg.t_max = t_max;
        auto r = agent::run_episode(C().assets, t, p, cfg);
        ++runs;
        if (r.steps != t_max || r.transcript.size() != t_max) ++wrong;
      }
    }
  }
  return {wrong == 0, std::to_string(runs) + " episodes, " + std::to_string(wrong) + " off budget"};
}

// 5 ------------------------------------------------------------------------
Verdict scheduling() {
  std::size_t mismatches = 0;
  for (const auto& policies : {corpus::oracle_policies(C()), random_policies()}) {
    std::string base;
    for (std::size_t w : {1, 2, 4, 8}) {
      orchestrate::RunOptions o;
      o.workers = w;
      o.seed = 17;
      o.detector = "noisy";
      auto s = orchestrate::report_json(orchestrate::run_suite(C().suite, C().assets, policies, o).report).dump();
      if (base.empty()) base = s;
      else if (s != base) ++mismatches;
    }
  }
  std::size_t unbalanced = 0, partitions = 0;
  std::vector<std::string> ids;
  for (std::size_t n = 0; n <= 500; ++n) {
    for (std::size_t w = 1; w <= 64; ++w) {
      auto p = orchestrate::partition(ids, w);
      std::size_t lo = n, hi = 0, total = 0;
      for (const auto& a : p.assignments) {
        lo = std::min(lo, a.size());
        hi = std::max(hi, a.size());
        total += a.size();
      }
      ++partitions;
      if (hi - lo > 1 || total != n) ++unbalanced;
    }
    ids.push_back("t" + std::to_string(n));
  }
  std::vector<std::string> paper_scale(154, "t");
  std::size_t fours = 0, threes = 0;
  for (const auto& a : orchestrate::partition(paper_scale, 40).assignments) {
    fours += a.size() == 4;
    threes += a.size() == 3;
  }
  const bool ok = mismatches == 0 && unbalanced == 0 && fours == 34 && threes == 6;
  return {ok, std::to_string(mismatches) + " report mismatches over workers {1,2,4,8}; " + std::to_string(partitions) +
                  " partitions, " + std::to_string(unbalanced) + " unbalanced; 154/40 -> 4x" + std::to_string(fours) +
                  " + 3x" + std::to_string(threes)};
}

// 6 ------------------------------------------------------------------------
Verdict bridge() {
  orchestrate::BridgeServer server(C().assets);
  const int port = server.start();
  orchestrate::BridgeWorker remote("http://127.0.0.1:" + std::to_string(port));
  orchestrate::InProcessWorker local(C().assets);
  std::size_t episodes = 0, diffs = 0;
  for (const auto& policies : {corpus::oracle_policies(C()), random_policies()}) {
    for (const auto& t : C().suite.tasks) {
      orchestrate::RunOptions o;
      o.seed = 23;
      o.t_max = 10;
      const auto cfg = orchestrate::episode_config(o, t.id);
      auto pa = policies(t, cfg.seed), pb = policies(t, cfg.seed);
      auto a = local.run(t, *pa, cfg);
      auto b = remote.run(t, *pb, cfg);
      ++episodes;
      bool same = a.final_digest == b.final_digest && a.reward == b.reward && a.steps == b.steps &&
                  a.transcript.size() == b.transcript.size();
      for (std::size_t i = 0; same && i < a.transcript.size(); ++i) {
        same = a.transcript[i].snapshot_digest == b.transcript[i].snapshot_digest;
      }
      diffs += !same;
    }
  }
  server.stop();
  return {diffs == 0, std::to_string(episodes) + " episode pairs, " + std::to_string(diffs) + " differences"};
}

// 7 ------------------------------------------------------------------------
Verdict hit_and_som() {
  support::Gen g(7070);
  std::size_t hits = 0, hit_wrong = 0;
  for (int round = 0; round < 50; ++round) {
    auto s = support::random_boxes(g, 30);
    for (int i = 0; i < 200; ++i) {
      double x = g.uni(0, 1), y = g.uni(0, 1);
      if (g.coin(0.2)) {
        const auto& n = s.windows.back().nodes[g.below(30)];
        x = n.bbox.x1;
        y = std::clamp(n.bbox.y2, 0.0, 1.0);
      }
      ++hits;
      if (envsim::hit_test(s, x, y) != support::hit_oracle(s, x, y)) ++hit_wrong;
    }
  }
  std::size_t som = 0, som_wrong = 0, perm_wrong = 0;
  for (int round = 0; round < 1000; ++round) {
    auto elems = support::random_elements(g, 1 + g.below(25));
    const double thr = g.coin(0.2) ? 1.0 : g.uni(0.05, 1.0);
    auto got = observe::merge_som(elems, thr);
    auto want = support::som_oracle(elems, thr);
    ++som;
    bool same = got.elements.size() == want.size();
    for (std::size_t i = 0; same && i < want.size(); ++i) same = got.elements[i].id == i && got.elements[i].element == want[i];
    som_wrong += !same;
    std::shuffle(elems.begin(), elems.end(), g.eng);
    perm_wrong += !(observe::merge_som(elems, thr) == got);
  }
  return {hit_wrong == 0 && som_wrong == 0 && perm_wrong == 0 && hits >= 10000 && som >= 1000,
          std::to_string(hits) + " hit-tests (" + std::to_string(hit_wrong) + " wrong), " + std::to_string(som) +
              " merges (" + std::to_string(som_wrong) + " wrong, " + std::to_string(perm_wrong) + " order-dependent)"};
}

// 8 ------------------------------------------------------------------------
Verdict dsl() {
  std::size_t examples_ok = 0;
  for (const auto& ex : support::prompt_examples()) {
    try {
      auto p = actions::parse_program(ex.code);
      std::vector<std::string> got;
      for (const auto& c : p.calls) got.push_back(c.to_source());
      examples_ok += got == ex.calls;
    } catch (const Error&) {
    }
  }
  support::Gen g(9090);
  std::size_t rejected = 0;
  for (int i = 0; i < 10000; ++i) {
    try {
      actions::parse_program(support::inject_statement(g));
    } catch (const Error&) {
      ++rejected;
    }
  }
  return {examples_ok == 9 && support::prompt_examples().size() == 9 && rejected == 10000,
          std::to_string(examples_ok) + "/9 examples, " + std::to_string(rejected) + "/10000 injected statements rejected"};
}

// 9 ------------------------------------------------------------------------
Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "arena_acceptance_runs";
  fs::remove_all(root);
  std::size_t differing = 0, compared = 0;
  std::string digest_input;
  for (const std::string policy : {"scripted", "random"}) {
    std::map<std::string, std::string> first;
    for (int rep = 0; rep < 2; ++rep) {
      cli::RunConfig cfg;
      cfg.policy = policy;
      cfg.seed = 7;
      cfg.detector = "noisy";
      cfg.out_dir = (root / ("rep" + std::to_string(rep))).string();
      std::ostringstream sink;
      auto files = cli::cmd_run(cfg, sink);
      std::map<std::string, std::string> now;
      for (const auto& e : fs::directory_iterator(files.dir)) {
        if (e.path().filename() != "run_meta.json") now[e.path().filename().string()] = slurp(e.path());
      }
      if (rep == 0) {
        first = now;
        for (const auto& [name, bytes] : now) digest_input += policy + "/" + name + "\n" + sha256_hex(bytes) + "\n";
      } else {
        compared += now.size();
        differing += now != first;
      }
    }
  }
  fs::remove_all(root);
  const std::string digest = sha256_hex(digest_input);
  const bool same_host = differing == 0 && compared > 0;

  // A second platform contributes its digest through the environment.
  const char* other = std::getenv("ARENA_CROSS_HOST_DIGEST");
  std::string detail = std::to_string(compared) + " files byte-identical across repeated runs on this host; digest " +
                       digest;
  if (!other || !*other) {
    return {false, detail + "; no second host platform available (set ARENA_CROSS_HOST_DIGEST from another host)",
            same_host};
  }
  const bool cross = digest == other;
  return {same_host && cross, detail + (cross ? "; matches the other host" : "; differs from the other host")};
}

// 10 -----------------------------------------------------------------------
Verdict report_fidelity() {
  auto h = orchestrate::load_human_baseline(orchestrate::default_human_baseline_path());
  const std::vector<std::vector<std::string>> want = {
      {"Task Domain", "Avg. # Steps", "Avg. Succ. Rate", "Avg. Difficulty"},
      {"LibreOffice Calc", "15.3", "83.3%", "2.0"},
      {"LibreOffice Writer", "8.3", "66.7%", "1.9"},
      {"Windows System", "6.3", "83.3%", "1.6"},
      {"Windows Utilities", "11.7", "91.7%", "1.3"},
      {"VLC Player", "6.6", "42.8%", "2.4"},
      {"VS Code", "4.5", "68.4%", "2.1"},
      {"Web Browsing", "5.5", "76.7%", "1.9"},
      {"Overall", "8.1", "74.5%", "1.9"},
  };
  std::vector<std::vector<std::string>> got;
  std::istringstream in(orchestrate::render_human_stats(h));
  for (std::string line; std::getline(in, line);) {
    if (line.find_first_not_of("-+") == std::string::npos) continue;  // rule line
    got.push_back(cells(line));
  }
  std::size_t rows_ok = 0;
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) rows_ok += got[i] == want[i];
  const bool ok = got.size() == want.size() && rows_ok == want.size();
  return {ok, std::to_string(rows_ok) + "/" + std::to_string(want.size()) + " rows exact" +
                  (ok ? "; Overall | 8.1 | 74.5% | 1.9" : "")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oracle completeness", oracle_completeness}, {"reward range", reward_range},
      {"infeasibility contract", infeasibility},    {"termination bound", termination_bound},
      {"scheduling invariance", scheduling},        {"bridge equivalence", bridge},
      {"hit-test and SoM oracles", hit_and_som},    {"DSL fidelity", dsl},
      {"determinism", determinism},                 {"report fidelity", report_fidelity},
  };
  int hard_failures = 0, passes = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    std::cout << "criterion " << (i + 1) << " (" << criteria[i].first << "): " << (v.pass ? "PASS" : "FAIL");
    if (!v.pass && v.host_limited) std::cout << " [host-limited]";
    std::cout << " - " << v.detail << "\n";
    if (v.pass) ++passes;
    else if (!v.host_limited) ++hard_failures;
  }
  std::cout << passes << "/" << criteria.size() << " criteria passed";
  if (passes + hard_failures < int(criteria.size())) {
    std::cout << "; host-limited criteria fail only for lack of a second platform";
  }
  std::cout << "\n";
  return hard_failures == 0 ? 0 : 1;
}
