#include "doctest.h"

#include "arena/corpus.hpp"
#include "arena/envsim.hpp"
#include "support.hpp"

using namespace arena;
using namespace arena::envsim;

namespace {

const AppCatalog& demo() {
  static const AppCatalog c = support::demo_catalog();
  return c;
}

DeviceState with_demo() {
  DeviceState s = reset(demo(), 5);
  open_program(demo(), s, "demo");
  return s;
}

// One foreground window holding `n` random nodes.

}  // namespace

TEST_CASE("reset") {
  auto a = reset(demo(), 42), b = reset(demo(), 42);
  CHECK(snapshot(a) == snapshot(b));
  std::set<std::string> roots;
  for (const auto& [path, f] : a.files) {
    if (path.rfind(std::string(kUserHome) + "\\", 0) == 0) roots.insert(path.substr(std::string(kUserHome).size() + 1));
  }
  CHECK(roots == std::set<std::string>{"Desktop", "Documents", "Downloads", "Pictures"});
  CHECK(a.windows.empty());
  CHECK(a.clipboard.kind == ClipboardKind::empty);
  CHECK(a.tick == 0);

  auto s1 = reset(demo(), 1), s2 = reset(demo(), 2);
  CHECK(snapshot(s1) != snapshot(s2));
  s2.rng_seed = 1;
  CHECK(s1 == s2);
  CHECK(snapshot(s1) == snapshot(s2));
}

TEST_CASE("published config block opens VLC in front") {
  const auto catalog = corpus::app_catalog();
  auto s = reset(catalog, 0);
  std::vector<taskspec::ConfigStep> steps = {
      {"launch", {{"command", "vlc"}}},
      {"execute",
       {{"command", json::array({"python", "-c",
                                 "import pyautogui; import time; pyautogui.click(960, 540); time.sleep(0.5);"})}}}};
  auto records = apply_config(catalog, {}, s, steps);
  REQUIRE(s.foreground());
  CHECK(s.foreground()->app == "vlc");
  CHECK(records.size() == 2);
  CHECK(s.tick == 1);  // the half-second sleep rounds up to one tick
  CHECK(960.0 / kScreenWidthPx == doctest::Approx(0.6667).epsilon(1e-3));
  CHECK(540.0 / kScreenHeightPx == doctest::Approx(0.6));
}

TEST_CASE("config errors") {
  auto s = reset(demo(), 0);
  const auto before = s;
  CHECK_THROWS_AS(apply_config_step(demo(), {}, s, {"teleport", json::object()}), UnknownStep);
  CHECK_THROWS_AS(apply_config_step(demo(), {}, s, {"download", {{"fixture", "nope"}, {"path", "C:\\x"}}}),
                  FixtureMissing);
  CHECK_THROWS_AS(apply_config_step(demo(), {}, s, {"execute", {{"command", "rm -rf /"}}}), ExecDenied);
  CHECK_THROWS_AS(
      apply_config_step(demo(), {}, s, {"execute", {{"command", json::array({"python", "-c", "import os"})}}}),
      ExecDenied);
  CHECK(s == before);
  CHECK(apply_config(demo(), {}, s, {}).empty());
  CHECK(s == before);
}

TEST_CASE("click_at hits the node a brute-force scan picks") {
  auto s = reset(demo(), 0);
  apply_config_step(demo(), {}, s, {"launch", {{"command", "demo"}}});
  // Flag button spans x .4-.6, y .2-.3; in pixels its centre is (720, 225).
  auto hit = support::hit_oracle(s, 720.0 / kScreenWidthPx, 225.0 / kScreenHeightPx);
  REQUIRE(hit);
  CHECK(hit->node == "flag");
  apply_config_step(demo(), {}, s,
                    {"execute", {{"command", json::array({"python", "-c", "pyautogui.click(720, 225)"})}}});
  CHECK(s.settings.at("demo").at("flag") == true);
}

TEST_CASE("hit_test basics") {
  auto empty = reset(demo(), 0);
  CHECK_FALSE(hit_test(empty, 0, 0));
  CHECK_THROWS_AS(hit_test(empty, 1.01, 0.5), OutOfRange);
  CHECK_THROWS_AS(hit_test(empty, 0.5, -0.1), OutOfRange);

  auto s = with_demo();
  auto h = hit_test(s, 0.2, 0.25);  // save button over the panel
  REQUIRE(h);
  CHECK(h->node == "save");
  h = hit_test(s, 0.05, 0.85);
  REQUIRE(h);
  CHECK(h->node == "panel");
}

TEST_CASE("hit_test agrees with an exhaustive scan") {
  support::Gen g(2024);
  std::size_t hits = 0;
  for (int round = 0; round < 20; ++round) {
    auto s = support::random_boxes(g, 30);
    for (int i = 0; i < 200; ++i) {
      double x = g.uni(0, 1), y = g.uni(0, 1);
      if (g.coin(0.2)) {  // land on a box edge
        const auto& n = s.windows.back().nodes[g.below(30)];
        x = n.bbox.x1;
        y = std::clamp(n.bbox.y2, 0.0, 1.0);
      }
      auto got = hit_test(s, x, y);
      auto want = support::hit_oracle(s, x, y);
      CHECK(got == want);
      hits += got ? 1 : 0;
    }
  }
  CHECK(hits > 1000);  // the fuzz actually exercises hits
}

TEST_CASE("dispatch_event") {
  auto s = with_demo();
  const std::string out = user_path("Documents\\out.txt");
  auto rec = dispatch_event(demo(), s, "demo", "save", EventKind::click);
  CHECK(rec.kind == "dispatch");
  REQUIRE(s.files.count(out));
  CHECK(s.files.at(out).content == "saved");

  const auto before = s;
  rec = dispatch_event(demo(), s, "demo", "label", EventKind::click);
  CHECK(rec.kind == "noop");
  CHECK(rec.edits.empty());
  CHECK(s == before);

  CHECK_THROWS_AS(dispatch_event(demo(), s, "demo", "off", EventKind::click), NodeDisabled);
  CHECK_THROWS_AS(dispatch_event(demo(), s, "demo", "ghost", EventKind::click), UnknownNode);
  CHECK(s == before);
}

TEST_CASE("typing, keys and focus") {
  auto s = with_demo();
  CHECK_THROWS_AS(type_text(demo(), s, "x"), NoFocusedInput);
  pointer_event(demo(), s, 0.3, 0.45, EventKind::click);
  REQUIRE(s.focus);
  CHECK(s.focus->node == "name");
  type_text(demo(), s, "alice");
  press_key(demo(), s, "backspace");
  type_text(demo(), s, "e");
  CHECK(s.window("demo")->find("name")->content == "alice");
  press_key(demo(), s, "ctrl+a");
  type_text(demo(), s, "bob");
  press_key(demo(), s, "enter");
  CHECK(s.settings.at("demo").at("name") == "bob");
  pointer_event(demo(), s, 0.05, 0.85, EventKind::click);  // panel is not an input
  CHECK_FALSE(s.focus);
}

TEST_CASE("navigation and scrolling") {
  auto s = with_demo();
  pointer_event(demo(), s, 0.8, 0.65, EventKind::click);
  CHECK(s.foreground()->page == "second");
  CHECK(s.foreground()->title == "Demo - Second");
  const UiNode* deep = s.foreground()->find("deep");
  REQUIRE(deep);
  CHECK_FALSE(is_displayed(*s.foreground(), *deep));
  scroll(s, "down");
  scroll(s, "down");
  CHECK(s.foreground()->viewport == doctest::Approx(0.5));
  CHECK(scroll(s, "down").kind == "noop");  // clamped at the extent
  deep = s.foreground()->find("deep");
  CHECK(is_displayed(*s.foreground(), *deep));
  auto r = displayed_bbox(*s.foreground(), *deep);
  pointer_event(demo(), s, r.cx(), r.cy(), EventKind::click);
  CHECK(s.settings.at("demo").at("name") == "deep");
  CHECK_THROWS_AS(scroll(s, "left"), EffectError);
}

TEST_CASE("scheduled download lands on the third tick") {
  auto s = with_demo();
  dispatch_event(demo(), s, "demo", "later", EventKind::click);
  const std::string zip = user_path("Downloads\\big.zip");
  int landed = -1;
  for (int t = 1; t <= 5; ++t) {
    tick_wait(demo(), s);
    if (landed < 0 && s.files.count(zip)) landed = t;
  }
  CHECK(landed == 3);
  CHECK(s.timers.empty());
}

TEST_CASE("tick_wait on a static state only advances the clock") {
  auto s = with_demo();
  auto before = s;
  tick_wait(demo(), s);
  CHECK(s.tick == before.tick + 1);
  before.tick = s.tick;
  CHECK(s == before);
}

TEST_CASE("random dispatch sequences replay to the same state") {
  support::Gen g(8);
  const std::vector<std::string> nodes = {"save", "flag", "later", "label", "panel", "name"};
  for (int round = 0; round < 10; ++round) {
    auto s = reset(demo(), round);
    std::vector<EffectRecord> records;
    records.push_back(open_program(demo(), s, "demo"));
    std::uint64_t last_tick = 0;
    for (int i = 0; i < 20; ++i) {
      switch (g.below(4)) {
        case 0:
          if (s.foreground()->page == "main") {
            records.push_back(dispatch_event(demo(), s, "demo", nodes[g.below(nodes.size())], EventKind::click));
          }
          break;
        case 1:
          try {
            records.push_back(pointer_event(demo(), s, g.uni(0, 1), g.uni(0, 1), EventKind::click));
          } catch (const NodeDisabled&) {
          }
          break;
        case 2: records.push_back(tick_wait(demo(), s)); break;
        default:
          if (s.focus) records.push_back(type_text(demo(), s, g.word()));
      }
      CHECK(s.tick >= last_tick);
      last_tick = s.tick;
    }
    auto again = replay(demo(), round, records);
    CHECK(again == s);
    CHECK(snapshot_digest(again) == snapshot_digest(s));
  }
}

TEST_CASE("snapshots round-trip and see every edit") {
  support::Gen g(77);
  for (int round = 0; round < 30; ++round) {
    auto s = with_demo();
    for (int i = 0; i < 10; ++i) {
      const auto prior = s;
      const std::string before = snapshot(s);
      try {
        pointer_event(demo(), s, g.uni(0, 1), g.uni(0, 1), EventKind::click);
      } catch (const NodeDisabled&) {
        CHECK(s == prior);
      }
      CHECK((s == prior) == (snapshot(s) == before));
      if (s.focus && g.coin()) type_text(demo(), s, g.utf8());
    }
    s.clipboard = {ClipboardKind::text, g.utf8()};
    s.cookies.push_back({g.word(), g.word(), g.utf8()});
    const std::string bytes = snapshot(s);
    auto parsed = parse_snapshot(bytes);
    CHECK(parsed == s);
    CHECK(snapshot(parsed) == bytes);
  }
  CHECK_THROWS_AS(parse_snapshot("not a snapshot"), SnapshotError);
}

TEST_CASE("text transforms") {
  CHECK(strip_highlights("a <hl>b</hl> c") == "a b c");
  CHECK(set_line("one\ntwo\nthree", 1, "2") == "one\n2\nthree");
  CHECK(set_line("x", 0, "y") == "y");
  CHECK_THROWS_AS(set_line("x\ny", 2, "z"), EffectError);
}

TEST_CASE("open_program and window switching") {
  auto s = reset(demo(), 0);
  CHECK_THROWS_AS(open_program(demo(), s, "photoshop"), NoSuchProgram);
  open_program(demo(), s, "DEMO.EXE");
  CHECK(s.foreground_id() == "demo");
  CHECK(open_program(demo(), s, "demo").edits.empty());  // single instance
  CHECK_THROWS_AS(switch_to_window(s, "Nope"), NoSuchWindowTitle);
  CHECK_NOTHROW(switch_to_window(s, "Demo"));
}
