#include "arena/observe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <tuple>

namespace arena::observe {

namespace {

constexpr std::array<std::string_view, 4> kSources = {"uia", "ocr_sim", "icon_sim", "image_sim"};
constexpr std::array<std::string_view, 5> kKinds = {"text", "button", "input", "image", "icon"};

template <std::size_t N>
std::size_t index_of(std::string_view s, const std::array<std::string_view, N>& names,
                     const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return i;
  }
  throw ConfigError(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

std::string_view source_name(Source s) { return kSources[static_cast<int>(s)]; }
Source parse_source(std::string_view s) {
  return static_cast<Source>(index_of(s, kSources, "source"));
}
std::string_view kind_name(ElementKind k) { return kKinds[static_cast<int>(k)]; }
ElementKind parse_kind(std::string_view s) {
  return static_cast<ElementKind>(index_of(s, kKinds, "element kind"));
}

ElementKind kind_for_node(envsim::NodeKind k) {
  using envsim::NodeKind;
  switch (k) {
    case NodeKind::button:
    case NodeKind::slider: return ElementKind::button;
    case NodeKind::input: return ElementKind::input;
    case NodeKind::image: return ElementKind::image;
    case NodeKind::icon: return ElementKind::icon;
    case NodeKind::text:
    case NodeKind::list_item: break;
  }
  return ElementKind::text;
}

Rgb source_color(Source s) {
  switch (s) {
    case Source::ocr_sim: return {0, 0, 255};
    case Source::icon_sim: return {0, 200, 0};
    case Source::image_sim: return {255, 0, 0};
    case Source::uia: break;
  }
  return {255, 0, 255};
}

std::string_view source_color_name(Source s) {
  switch (s) {
    case Source::ocr_sim: return "blue";
    case Source::icon_sim: return "green";
    case Source::image_sim: return "red";
    case Source::uia: break;
  }
  return "magenta";
}

void to_json(json& j, const ScreenElement& e) {
  j = json{{"source", source_name(e.source)}, {"kind", kind_name(e.kind)},
           {"content", e.content}, {"bbox", e.bbox}, {"node", e.node_id},
           {"color", source_color_name(e.source)}};
}

void from_json(const json& j, ScreenElement& e) {
  e.source = parse_source(j.at("source").get<std::string>());
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.content = j.at("content").get<std::string>();
  e.bbox = j.at("bbox").get<Rect>();
  e.node_id = j.value("node", "");
}

void to_json(json& j, const AnnotatedScreen& s) {
  json els = json::array();
  for (const auto& m : s.elements) {
    json e = m.element;
    e["id"] = m.id;
    els.push_back(std::move(e));
  }
  j = json{{"elements", els}, {"iou_threshold", s.iou_threshold}, {"seed", s.seed}};
}

void from_json(const json& j, AnnotatedScreen& s) {
  s = AnnotatedScreen{};
  s.iou_threshold = j.value("iou_threshold", 0.7);
  s.seed = j.value("seed", std::uint64_t{0});
  for (const auto& e : j.at("elements")) {
    s.elements.push_back({e.at("id").get<std::size_t>(), e.get<ScreenElement>()});
  }
}

void DetectorConfig::check() const {
  auto rate_ok = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!(jitter >= 0.0) || !std::isfinite(jitter)) throw ConfigError("jitter must be >= 0");
  if (!rate_ok(drop_rate) || !rate_ok(merge_rate)) throw ConfigError("rates must be in [0,1]");
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("iou threshold must be in (0,1]");
  }
}

DetectorConfig detector_profile(std::string_view name) {
  DetectorConfig c;
  if (name == "clean") return c;
  if (name == "uia") {
    c.sources = {Source::uia};
    return c;
  }
  if (name == "noisy" || name == "pixel") {
    c.jitter = 0.01;
    c.drop_rate = 0.15;
    c.merge_rate = 0.1;
    if (name == "pixel") c.sources.erase(Source::uia);
    return c;
  }
  throw ConfigError("unknown detector profile '" + std::string(name) + "'");
}

std::vector<std::string> detector_profile_names() { return {"clean", "noisy", "pixel", "uia"}; }

// ---------------------------------------------------------------------------
// Collection

namespace {

bool ocr_sees(const envsim::UiNode& n) {
  using envsim::NodeKind;
  if (n.shown_text().empty()) return false;
  return n.kind == NodeKind::text || n.kind == NodeKind::list_item || n.kind == NodeKind::button ||
         n.kind == NodeKind::input || n.kind == NodeKind::slider;
}

bool icon_sees(const envsim::UiNode& n) {
  using envsim::NodeKind;
  return n.kind == NodeKind::icon || (n.kind == NodeKind::button && n.shown_text().empty());
}

bool image_sees(const envsim::UiNode& n) { return n.kind == envsim::NodeKind::image; }

/// Jitters a box with each offset clamped to 3 sigma. Returns nullopt when
/// the noisy box degenerates.
std::optional<Rect> jitter_box(const Rect& truth, double sigma, Rng& rng) {
  auto noise = [&] {
    double z = rng.normal();
    return std::clamp(z, -3.0, 3.0) * sigma;
  };
  double x1 = truth.x1 + noise(), y1 = truth.y1 + noise();
  double x2 = truth.x2 + noise(), y2 = truth.y2 + noise();
  if (x1 > x2) std::swap(x1, x2);
  if (y1 > y2) std::swap(y1, y2);
  Rect r{std::clamp(x1, 0.0, 1.0), std::clamp(y1, 0.0, 1.0), std::clamp(x2, 0.0, 1.0),
         std::clamp(y2, 0.0, 1.0)};
  if (!(r.x2 > r.x1) || !(r.y2 > r.y1)) return std::nullopt;
  return r;
}

bool same_line(const Rect& a, const Rect& b) {
  double overlap = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  return overlap > 0.5 * std::min(a.height(), b.height());
}

Rect union_box(const Rect& a, const Rect& b) {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2), std::max(a.y2, b.y2)};
}

}  // namespace

std::vector<ScreenElement> collect_elements(const envsim::DeviceState& state,
                                            const DetectorConfig& cfg, std::uint64_t seed) {
  cfg.check();
  std::vector<ScreenElement> out;
  const envsim::WindowState* w = state.foreground();
  if (!w) return out;

  std::vector<const envsim::UiNode*> shown;
  for (const auto& n : w->nodes) {
    if (envsim::is_displayed(*w, n)) shown.push_back(&n);
  }

  if (cfg.sources.count(Source::uia)) {
    for (const auto* n : shown) {
      out.push_back({Source::uia, kind_for_node(n->kind), n->shown_text(),
                     envsim::displayed_bbox(*w, *n), n->id});
    }
  }

  struct Detector {
    Source source;
    bool (*sees)(const envsim::UiNode&);
  };
  const Detector detectors[] = {{Source::ocr_sim, &ocr_sees},
                                {Source::icon_sim, &icon_sees},
                                {Source::image_sim, &image_sees}};
  for (const auto& d : detectors) {
    if (!cfg.sources.count(d.source)) continue;
    // One stream per detector so enabling one does not perturb another.
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(d.source)));
    std::vector<ScreenElement> found;
    for (const auto* n : shown) {
      if (!d.sees(*n)) continue;
      // Draw counts are fixed per element to keep streams aligned.
      const bool dropped = rng.chance(cfg.drop_rate);
      Rect box = envsim::displayed_bbox(*w, *n);
      std::optional<Rect> noisy = box;
      if (cfg.jitter > 0.0) noisy = jitter_box(box, cfg.jitter, rng);
      if (dropped || !noisy) continue;
      ElementKind kind = d.source == Source::icon_sim    ? ElementKind::icon
                         : d.source == Source::image_sim ? ElementKind::image
                                                         : kind_for_node(n->kind);
      found.push_back({d.source, kind, n->shown_text(), *noisy, n->id});
    }
    if (d.source == Source::ocr_sim && cfg.merge_rate > 0.0) {
      std::vector<ScreenElement> merged;
      for (auto& e : found) {
        if (!merged.empty() && same_line(merged.back().bbox, e.bbox) &&
            rng.chance(cfg.merge_rate)) {
          auto& prev = merged.back();
          prev.content += " " + e.content;
          prev.bbox = union_box(prev.bbox, e.bbox);
          prev.kind = ElementKind::text;
          continue;
        }
        merged.push_back(std::move(e));
      }
      found = std::move(merged);
    }
    out.insert(out.end(), found.begin(), found.end());
  }
  return out;
}

AnnotatedScreen merge_som(std::vector<ScreenElement> elements, double iou_threshold,
                          std::uint64_t seed) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ConfigError("iou threshold must be in (0,1]");
  }
  std::vector<const ScreenElement*> uia;
  for (const auto& e : elements) {
    if (e.source == Source::uia) uia.push_back(&e);
  }
  std::vector<ScreenElement> kept;
  for (const auto& e : elements) {
    if (e.source != Source::uia) {
      bool dup = std::any_of(uia.begin(), uia.end(),
                             [&](const ScreenElement* u) { return iou(u->bbox, e.bbox) >= iou_threshold; });
      if (dup) continue;
    }
    kept.push_back(e);
  }
  auto key = [](const ScreenElement& e) {
    return std::make_tuple(e.bbox.y1, e.bbox.x1, static_cast<int>(e.source), e.bbox.x2, e.bbox.y2,
                           static_cast<int>(e.kind), std::cref(e.content), std::cref(e.node_id));
  };
  std::sort(kept.begin(), kept.end(),
            [&](const ScreenElement& a, const ScreenElement& b) { return key(a) < key(b); });
  AnnotatedScreen s;
  s.iou_threshold = iou_threshold;
  s.seed = seed;
  for (std::size_t i = 0; i < kept.size(); ++i) s.elements.push_back({i, std::move(kept[i])});
  return s;
}

// ---------------------------------------------------------------------------
// Table

namespace {

std::string one_line(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(c == '\n' || c == '\r' || c == '\t' ? ' ' : c);
  return out;
}

std::string coord(double v) { return format_fixed(v, 2); }

}  // namespace

std::string render_element_table(const AnnotatedScreen& screen) {
  std::string out(kTableHeader);
  out.push_back('\n');
  for (const auto& m : screen.elements) {
    const auto& e = m.element;
    out += std::to_string(m.id) + " | " + std::string(kind_name(e.kind)) + " | " +
           one_line(e.content) + " | [" + coord(e.bbox.x1) + ", " + coord(e.bbox.y1) + ", " +
           coord(e.bbox.x2) + ", " + coord(e.bbox.y2) + "]\n";
  }
  return out;
}

std::vector<TableRow> parse_element_table(std::string_view text) {
  std::vector<TableRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw TableFormatError("line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != kTableHeader) fail("missing table header");
      continue;
    }
    if (line.empty()) continue;
    auto p1 = line.find(" | ");
    if (p1 == std::string::npos) fail("expected 'ID | '");
    auto p2 = line.find(" | ", p1 + 3);
    auto p3 = line.rfind(" | [");
    if (p2 == std::string::npos || p3 == std::string::npos || p3 < p2 || line.back() != ']') {
      fail("expected four '|'-separated columns");
    }
    TableRow r;
    try {
      std::size_t used = 0;
      r.id = std::stoul(line.substr(0, p1), &used);
      if (used != p1) fail("bad id");
    } catch (const std::logic_error&) {
      fail("bad id");
    }
    r.kind = line.substr(p1 + 3, p2 - p1 - 3);
    r.content = p3 == p2 ? "" : line.substr(p2 + 3, p3 - p2 - 3);
    std::string coords = line.substr(p3 + 4, line.size() - p3 - 5);
    double v[4];
    std::istringstream cs(coords);
    for (int i = 0; i < 4; ++i) {
      if (!(cs >> v[i])) fail("bad coordinates");
      if (i < 3) {
        char comma = 0;
        if (!(cs >> comma) || comma != ',') fail("bad coordinates");
      }
    }
    cs >> std::ws;
    if (!cs.eof()) fail("bad coordinates");
    r.bbox = {v[0], v[1], v[2], v[3]};
    rows.push_back(std::move(r));
  }
  if (lineno == 0) throw TableFormatError("empty table");
  return rows;
}

std::string render_text_screen(const AnnotatedScreen& screen, int cols, int rows) {
  if (cols < 20 || rows < 10) throw ConfigError("text grid must be at least 20x10");
  std::vector<std::string> grid(static_cast<std::size_t>(rows), std::string(static_cast<std::size_t>(cols), ' '));
  for (const auto& m : screen.elements) {
    const std::string text = one_line(m.element.content);
    if (text.empty()) continue;
    int c = std::min(cols - 1, static_cast<int>(std::floor(m.element.bbox.x1 * cols)));
    int r = std::min(rows - 1, static_cast<int>(std::floor(m.element.bbox.y1 * rows)));
    auto& row = grid[static_cast<std::size_t>(r)];
    for (std::size_t i = 0; i < text.size() && c + static_cast<int>(i) < cols; ++i) {
      row[static_cast<std::size_t>(c) + i] = text[i];
    }
  }
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) out.push_back('\n');
    out += grid[i];
  }
  return out;
}

void to_json(json& j, const Observation& o) {
  j = json{{"instruction", o.instruction},
           {"foreground_title", o.foreground_title},
           {"all_window_titles", o.all_window_titles},
           {"clipboard_text", o.clipboard_text},
           {"element_table", o.element_table},
           {"text_rendering", o.text_rendering},
           {"screen", o.screen}};
  if (o.previous_screen) j["previous_screen"] = *o.previous_screen;
}

Observation build_observation(const envsim::DeviceState& state, const DetectorConfig& cfg,
                              const std::string& instruction,
                              const std::optional<AnnotatedScreen>& previous,
                              std::uint64_t seed) {
  Observation o;
  o.instruction = instruction;
  if (const auto* w = state.foreground()) o.foreground_title = w->title;
  for (const auto& w : state.windows) o.all_window_titles.push_back(w.title);
  o.clipboard_text = state.clipboard.text;
  o.screen = merge_som(collect_elements(state, cfg, seed), cfg.iou_threshold, seed);
  o.element_table = render_element_table(o.screen);
  o.text_rendering = render_text_screen(o.screen);
  o.previous_screen = previous;
  return o;
}

// ---------------------------------------------------------------------------
// Debug raster

namespace {

// 3x5 digit glyphs, one row per entry, bit 2 = leftmost column.
constexpr std::array<std::array<std::uint8_t, 5>, 10> kDigits = {{
    {7, 5, 5, 5, 7}, {2, 6, 2, 2, 7}, {7, 1, 7, 4, 7}, {7, 1, 7, 1, 7}, {5, 5, 7, 1, 1},
    {7, 4, 7, 1, 7}, {7, 4, 7, 5, 7}, {7, 1, 1, 1, 1}, {7, 5, 7, 5, 7}, {7, 5, 7, 1, 7},
}};

}  // namespace

std::string render_ppm(const AnnotatedScreen& screen, int width, int height) {
  if (width <= 0 || height <= 0) throw ConfigError("raster size must be positive");
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height * 3, 255);
  auto put = [&](int x, int y, Rgb c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    auto i = (static_cast<std::size_t>(y) * width + x) * 3;
    px[i] = c.r;
    px[i + 1] = c.g;
    px[i + 2] = c.b;
  };
  for (const auto& m : screen.elements) {
    const Rgb c = source_color(m.element.source);
    int x1 = static_cast<int>(std::lround(m.element.bbox.x1 * (width - 1)));
    int y1 = static_cast<int>(std::lround(m.element.bbox.y1 * (height - 1)));
    int x2 = static_cast<int>(std::lround(m.element.bbox.x2 * (width - 1)));
    int y2 = static_cast<int>(std::lround(m.element.bbox.y2 * (height - 1)));
    for (int t = 0; t < 2; ++t) {
      for (int x = x1; x <= x2; ++x) {
        put(x, y1 + t, c);
        put(x, y2 - t, c);
      }
      for (int y = y1; y <= y2; ++y) {
        put(x1 + t, y, c);
        put(x2 - t, y, c);
      }
    }
    // Label: digits scaled 2x, right-aligned inside the top-right corner.
    const std::string label = std::to_string(m.id);
    const int scale = 2, glyph_w = 4 * scale;
    int ox = x2 - 2 - static_cast<int>(label.size()) * glyph_w;
    int oy = y1 + 3;
    for (char ch : label) {
      const auto& g = kDigits[static_cast<std::size_t>(ch - '0')];
      for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 3; ++col) {
          if (!(g[static_cast<std::size_t>(row)] & (4 >> col))) continue;
          for (int dy = 0; dy < scale; ++dy) {
            for (int dx = 0; dx < scale; ++dx) put(ox + col * scale + dx, oy + row * scale + dy, c);
          }
        }
      }
      ox += glyph_w;
    }
  }
  std::string out = "P6\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(px.data()), px.size());
  return out;
}

}  // namespace arena::observe
