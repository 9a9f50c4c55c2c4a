#pragma once

// Shared generators and brute-force oracles. Oracles here are written
// against the documented contracts, not against the library code.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "arena/envsim.hpp"
#include "arena/observe.hpp"

namespace support {

using arena::Rect;

struct Gen {
  std::mt19937_64 eng;
  explicit Gen(std::uint64_t seed) : eng(seed) {}

  double uni(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng); }
  std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng); }
  bool coin(double p = 0.5) { return uni(0.0, 1.0) < p; }

  /// Random rectangle inside the unit square with positive size.
  Rect rect(double min_side = 0.01) {
    double x1 = uni(0.0, 1.0 - min_side), y1 = uni(0.0, 1.0 - min_side);
    double x2 = uni(x1 + min_side, 1.0), y2 = uni(y1 + min_side, 1.0);
    return {x1, y1, x2, y2};
  }
  /// Rectangle on a 0.05 grid, so exact duplicates and shared edges happen.
  Rect grid_rect() {
    int a = int(below(20)), b = int(below(20));
    int c = a + 1 + int(below(20 - a)), d = b + 1 + int(below(20 - b));
    return {a * 0.05, b * 0.05, std::min(1.0, c * 0.05), std::min(1.0, d * 0.05)};
  }
  std::string word(std::size_t max_len = 8) {
    static const char* alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 _-.";
    std::string s;
    std::size_t n = 1 + below(max_len);
    for (std::size_t i = 0; i < n; ++i) s += alphabet[below(66)];
    return s;
  }
  /// Valid UTF-8 drawn from a small mixed alphabet.
  std::string utf8(std::size_t max_len = 12) {
    static const std::vector<std::string> pieces = {"a", "b", "c", "x", " ", "\xc3\xa9", "\xe6\x97\xa5", "\xf0\x9f\x98\x80"};
    std::string s;
    std::size_t n = below(max_len + 1);
    for (std::size_t i = 0; i < n; ++i) s += pieces[below(pieces.size())];
    return s;
  }
};

// ---------------------------------------------------------------------------
// Hit-test oracle: scan every node and compare pairwise under the documented
// order (higher z, then smaller area, then smaller id).

inline Rect shown_rect(const arena::envsim::WindowState& w, const arena::envsim::UiNode& n) {
  Rect r = n.bbox;
  if (n.scrolls) {
    r.y1 = n.bbox.y1 - w.viewport;
    r.y2 = n.bbox.y2 - w.viewport;
  }
  return r;
}

inline std::optional<arena::envsim::Hit> hit_oracle(const arena::envsim::DeviceState& s, double x, double y) {
  if (s.windows.empty()) return std::nullopt;
  const auto& w = s.windows.back();
  const arena::envsim::UiNode* best = nullptr;
  for (const auto& n : w.nodes) {
    if (!n.visible) continue;
    Rect r = shown_rect(w, n);
    if (r.x1 < 0 || r.y1 < 0 || r.x2 > 1 || r.y2 > 1) continue;
    if (x < r.x1 || x > r.x2 || y < r.y1 || y > r.y2) continue;
    if (!best) {
      best = &n;
      continue;
    }
    Rect b = shown_rect(w, *best);
    double area_n = (r.x2 - r.x1) * (r.y2 - r.y1), area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
    bool better = false;
    if (n.z != best->z) {
      better = n.z > best->z;
    } else if (area_n != area_b) {
      better = area_n < area_b;
    } else {
      better = n.id < best->id;
    }
    if (better) best = &n;
  }
  if (!best) return std::nullopt;
  return arena::envsim::Hit{w.id, best->id};
}

// ---------------------------------------------------------------------------
// Set-of-Marks oracle: pairwise IoU against every uia element, then a
// selection sort under the documented numbering order.

inline double iou_oracle(const Rect& a, const Rect& b) {
  double w = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  double h = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (w <= 0 || h <= 0) return 0.0;
  double inter = w * h;
  double uni = (a.x2 - a.x1) * (a.y2 - a.y1) + (b.x2 - b.x1) * (b.y2 - b.y1) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

inline bool som_before(const arena::observe::ScreenElement& a, const arena::observe::ScreenElement& b) {
  if (a.bbox.y1 != b.bbox.y1) return a.bbox.y1 < b.bbox.y1;
  if (a.bbox.x1 != b.bbox.x1) return a.bbox.x1 < b.bbox.x1;
  if (a.source != b.source) return int(a.source) < int(b.source);
  if (a.bbox.x2 != b.bbox.x2) return a.bbox.x2 < b.bbox.x2;
  if (a.bbox.y2 != b.bbox.y2) return a.bbox.y2 < b.bbox.y2;
  if (a.kind != b.kind) return int(a.kind) < int(b.kind);
  if (a.content != b.content) return a.content < b.content;
  return a.node_id < b.node_id;
}

inline std::vector<arena::observe::ScreenElement> som_oracle(const std::vector<arena::observe::ScreenElement>& in,
                                                              double threshold) {
  using arena::observe::Source;
  std::vector<arena::observe::ScreenElement> kept;
  for (std::size_t i = 0; i < in.size(); ++i) {
    bool drop = false;
    if (in[i].source != Source::uia) {
      for (std::size_t j = 0; j < in.size(); ++j) {
        if (in[j].source == Source::uia && iou_oracle(in[i].bbox, in[j].bbox) >= threshold) drop = true;
      }
    }
    if (!drop) kept.push_back(in[i]);
  }
  for (std::size_t i = 0; i < kept.size(); ++i) {
    std::size_t m = i;
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      if (som_before(kept[j], kept[m])) m = j;
    }
    std::swap(kept[i], kept[m]);
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Edit distance oracle: full-matrix DP over decoded code points.

inline std::vector<std::uint32_t> decode_utf8(const std::string& s) {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 6 ? 2 : (c >> 4) == 14 ? 3 : 4;
    std::uint32_t cp = len == 1 ? c : len == 2 ? (c & 0x1f) : len == 3 ? (c & 0x0f) : (c & 0x07);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline std::size_t lev_oracle(const std::string& a8, const std::string& b8) {
  auto a = decode_utf8(a8), b = decode_utf8(b8);
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

// ---------------------------------------------------------------------------
// A small app used by the simulator, action and agent tests.

inline arena::envsim::AppCatalog demo_catalog() {
  using namespace arena::envsim;
  auto eff = [](EffectKind k, std::string target, std::string key, arena::json value) {
    Effect e;
    e.kind = k;
    e.target = std::move(target);
    e.key = std::move(key);
    e.value = std::move(value);
    return e;
  };
  auto node = [](std::string id, NodeKind kind, std::string text, Rect box, std::int64_t z,
                 std::vector<Behavior> b) {
    UiNode n;
    n.id = std::move(id);
    n.kind = kind;
    n.content = std::move(text);
    n.bbox = box;
    n.z = z;
    n.behaviors = std::move(b);
    return n;
  };
  AppModel m;
  m.name = "demo";
  m.aliases = {"demo.exe"};
  m.title = "Demo";
  m.initial_page = "main";
  m.default_settings = {{"flag", false}, {"name", ""}};

  Effect later = eff(EffectKind::schedule, "", "", nullptr);
  later.delay = 3;
  later.then = {eff(EffectKind::write_file, user_path("Downloads\\big.zip"), "", "zip")};

  Page main;
  main.nodes = {
      node("panel", NodeKind::image, "Panel", {0.0, 0.1, 1.0, 0.9}, 0, {}),
      node("save", NodeKind::button, "Save", {0.1, 0.2, 0.3, 0.3}, 2,
           {{EventKind::click, "", {eff(EffectKind::write_file, user_path("Documents\\out.txt"), "", "saved")}}}),
      node("flag", NodeKind::button, "Flag", {0.4, 0.2, 0.6, 0.3}, 2,
           {{EventKind::click, "", {eff(EffectKind::set_setting, "demo", "flag", true)}}}),
      node("name", NodeKind::input, "", {0.1, 0.4, 0.6, 0.5}, 2,
           {{EventKind::key, "enter", {eff(EffectKind::set_setting, "demo", "name", "${node:name}")}}}),
      node("later", NodeKind::button, "Download", {0.7, 0.2, 0.9, 0.3}, 2, {{EventKind::click, "", {later}}}),
      node("next", NodeKind::button, "Next", {0.7, 0.6, 0.9, 0.7}, 2,
           {{EventKind::click, "", {eff(EffectKind::navigate, "second", "", nullptr)}}}),
      node("label", NodeKind::text, "Hello", {0.1, 0.6, 0.3, 0.65}, 1, {}),
  };
  UiNode off = node("off", NodeKind::button, "Off", {0.4, 0.6, 0.6, 0.7}, 2,
                    {{EventKind::click, "", {eff(EffectKind::set_setting, "demo", "flag", true)}}});
  off.enabled = false;
  main.nodes.push_back(off);
  m.pages["main"] = main;

  Page second;
  second.title = "Demo - Second";
  second.nodes = {node("back", NodeKind::button, "Back", {0.1, 0.1, 0.2, 0.2}, 2,
                       {{EventKind::click, "", {eff(EffectKind::navigate, "main", "", nullptr)}}})};
  UiNode deep = node("deep", NodeKind::button, "Deep", {0.1, 1.1, 0.3, 1.2}, 2,
                     {{EventKind::click, "", {eff(EffectKind::set_setting, "demo", "name", "deep")}}});
  deep.scrolls = true;
  second.nodes.push_back(deep);
  second.scroll_extent = 0.5;
  m.pages["second"] = second;

  AppCatalog c;
  c.add(m);
  return c;
}

// ---------------------------------------------------------------------------
// Fuzz inputs shared by the unit tests and the acceptance binary.

/// Windows full of overlapping boxes; ids may repeat.
inline arena::envsim::DeviceState random_boxes(Gen& g, std::size_t n) {
  using namespace arena::envsim;
  DeviceState s;
  WindowState w;
  w.id = "w";
  w.app = "demo";
  w.viewport = g.coin() ? 0.0 : 0.25;
  for (std::size_t i = 0; i < n; ++i) {
    UiNode node;
    node.id = "n" + std::to_string(g.below(n * 2));  // ids may repeat
    node.bbox = g.coin() ? g.grid_rect() : g.rect();
    node.z = static_cast<std::int64_t>(g.below(3));
    node.visible = !g.coin(0.1);
    node.scrolls = g.coin(0.2);
    w.nodes.push_back(node);
  }
  s.windows.push_back(w);
  return s;
}

/// Elements from every source, with exact and near duplicate boxes.
inline std::vector<arena::observe::ScreenElement> random_elements(Gen& g, std::size_t n) {
  using namespace arena::observe;
  std::vector<ScreenElement> out;
  const Source sources[] = {Source::uia, Source::ocr_sim, Source::icon_sim, Source::image_sim};
  for (std::size_t i = 0; i < n; ++i) {
    Rect r = g.coin() ? g.grid_rect() : g.rect();
    if (!out.empty() && g.coin(0.3)) {  // near-copy of an earlier box
      r = out[g.below(out.size())].bbox;
      if (g.coin()) r.x2 = std::min(1.0, r.x2 + g.uni(0, 0.05));
    }
    out.push_back({sources[g.below(4)], ElementKind(g.below(5)), g.word(), r, "n" + std::to_string(g.below(5))});
  }
  return out;
}

/// The nine worked examples from the planner prompt, with the canonical
/// calls each must bind to.
struct PromptExample {
  const char* code;
  std::vector<std::string> calls;
};

inline const std::vector<PromptExample>& prompt_examples() {
  static const std::vector<PromptExample> cases = {
      {"computer.os.open_program(\"msedge\") # browser first",
       {"computer.os.open_program(program=\"msedge\")"}},
      {"computer.mouse.move_id(id=29) # address bar\n"
       "computer.mouse.single_click()\n"
       "computer.keyboard.write(\"amazon.com\")\n"
       "computer.keyboard.press(\"enter\") # go",
       {"computer.mouse.move_id(id=29)", "computer.mouse.single_click()",
        "computer.keyboard.write(text=\"amazon.com\")", "computer.keyboard.press(key=\"enter\")"}},
      {"computer.mouse.move_id(id=107) # 'Hips don't'\ncomputer.mouse.double_click()",
       {"computer.mouse.move_id(id=107)", "computer.mouse.double_click()"}},
      {"computer.clipboard.copy_image(id=140, description=\"plot\") # image\n"
       "computer.os.open_program(\"outlook\")",
       {"computer.clipboard.copy_image(id=140, description=\"plot\")",
        "computer.os.open_program(program=\"outlook\")"}},
      {"computer.mouse.move_abs(x=0.25, y=0.25) # (44 | ocr | To | [0.14, 0.24, 0.16, 0.26])\n"
       "computer.mouse.single_click()\n"
       "computer.keyboard.write(\"Justin Wagle\")\n"
       "computer.keyboard.press(\"enter\")",
       {"computer.mouse.move_abs(x=0.25, y=0.25)", "computer.mouse.single_click()",
        "computer.keyboard.write(text=\"Justin Wagle\")", "computer.keyboard.press(key=\"enter\")"}},
      {"computer.mouse.move_abs(x=0.25, y=0.34)\ncomputer.mouse.single_click()\n"
       "computer.keyboard.write(\"Revenue projections\")",
       {"computer.mouse.move_abs(x=0.25, y=0.34)", "computer.mouse.single_click()",
        "computer.keyboard.write(text=\"Revenue projections\")"}},
      {"# thumbnail first\ncomputer.mouse.move_id(id=12) # not the slide number\n# click it\n"
       "computer.mouse.single_click()",
       {"computer.mouse.move_id(id=12)", "computer.mouse.single_click()"}},
      {"computer.mouse.move_id(id=78)\ncomputer.mouse.single_click()",
       {"computer.mouse.move_id(id=78)", "computer.mouse.single_click()"}},
      {"computer.os.open_program(\"msedge\") # then search",
       {"computer.os.open_program(program=\"msedge\")"}},
  };
  return cases;
}

/// A whitelisted statement with a forbidden construct spliced in.
inline std::string inject_statement(Gen& g) {
  static const std::vector<std::string> valid = {
      "computer.mouse.move_id(id=3)",          "computer.mouse.move_abs(x=0.5, y=0.25)",
      "computer.keyboard.write(\"hello\")",    "computer.keyboard.press(\"ctrl+s\")",
      "computer.os.open_program(\"notepad\")", "computer.mouse.scroll(\"down\")",
      "computer.clipboard.paste()",            "computer.window_manager.switch_to_application(\"Demo\")",
  };
  static const std::vector<std::string> payloads = {
      "import os",  "__import__('os')", "open('x')", "; x",           "lambda: 0", "[1]",
      "{1: 2}",     "f'x'",             "x.y",       "1 + 1",         "*a",        "**k",
      "exec('1')",  "(1)",              "not 1",     "a if b else c", "x := 1",    "await x",
      "computer.os", "...",             "`x`",       "$x",            "\\",        "@x",
  };
  std::string s = valid[g.below(valid.size())];
  const std::string& inj = payloads[g.below(payloads.size())];
  switch (g.below(5)) {
    case 0: s.insert(s.find('(') + 1, inj + (s[s.find('(') + 1] == ')' ? "" : ", ")); break;  // first argument
    case 1: s.insert(s.rfind(')'), (s[s.rfind(')') - 1] == '(' ? "" : ", ") + std::string("k=") + inj); break;
    case 2: s += "; " + inj; break;
    case 3: s = inj + "\n" + s; break;
    default: s.replace(s.find('('), 0, ".__class__"); break;
  }
  return s;
}

}  // namespace support
