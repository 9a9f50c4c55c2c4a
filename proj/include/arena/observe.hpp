#pragma once

// Agent-facing observation: detector simulation over the foreground window,
// Set-of-Marks merging with stable ids, the pipe element table and a
// positional text rendering.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "arena/common.hpp"
#include "arena/envsim.hpp"

namespace arena::observe {

ARENA_DEFINE_ERROR(TableFormatError);
ARENA_DEFINE_ERROR(ConfigError);

/// Declaration order is merge priority: uia wins ties.
enum class Source { uia, ocr_sim, icon_sim, image_sim };
enum class ElementKind { text, button, input, image, icon };

std::string_view source_name(Source s);
Source parse_source(std::string_view s);
std::string_view kind_name(ElementKind k);
ElementKind parse_kind(std::string_view s);
ElementKind kind_for_node(envsim::NodeKind k);

/// Annotation color per source: ocr blue, icon green, image red, uia magenta.
struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};
Rgb source_color(Source s);
std::string_view source_color_name(Source s);

struct ScreenElement {
  Source source = Source::uia;
  ElementKind kind = ElementKind::text;
  std::string content;
  Rect bbox;
  std::string node_id;  // simulator node the element came from

  bool operator==(const ScreenElement&) const = default;
};

struct Mark {
  std::size_t id = 0;
  ScreenElement element;
  bool operator==(const Mark&) const = default;
};

struct AnnotatedScreen {
  std::vector<Mark> elements;  // ids 0..n-1 in order
  double iou_threshold = 0.7;
  std::uint64_t seed = 0;

  const ScreenElement* find(std::size_t id) const {
    return id < elements.size() ? &elements[id].element : nullptr;
  }
  bool operator==(const AnnotatedScreen&) const = default;
};

void to_json(json& j, const ScreenElement& e);
void from_json(const json& j, ScreenElement& e);
void to_json(json& j, const AnnotatedScreen& s);
void from_json(const json& j, AnnotatedScreen& s);

struct DetectorConfig {
  std::set<Source> sources{Source::uia, Source::ocr_sim, Source::icon_sim, Source::image_sim};
  double jitter = 0.0;     // stddev of bbox noise, normalized units
  double drop_rate = 0.0;  // chance a detector misses an element
  double merge_rate = 0.0; // chance adjacent same-line ocr elements fuse
  double iou_threshold = 0.7;

  /// Throws ConfigError on out-of-range values.
  void check() const;
  bool operator==(const DetectorConfig&) const = default;
};

/// Named presets: "clean" (all sources, noiseless), "uia" (uia only),
/// "noisy" (all sources with jitter/drops/merges), "pixel" (detectors only,
/// noisy). Throws ConfigError for unknown names.
DetectorConfig detector_profile(std::string_view name);
std::vector<std::string> detector_profile_names();

std::vector<ScreenElement> collect_elements(const envsim::DeviceState& state,
                                            const DetectorConfig& cfg, std::uint64_t seed);

/// Drops detector elements overlapping any uia element with IoU >= threshold,
/// then numbers survivors by (y1, x1, source priority), remaining fields as
/// final tie-breaks so the result does not depend on input order.
AnnotatedScreen merge_som(std::vector<ScreenElement> elements, double iou_threshold,
                          std::uint64_t seed = 0);

inline constexpr std::string_view kTableHeader =
    "ID | Type | Text content or description | Normalized location [x1, y1, x2, y2]";

std::string render_element_table(const AnnotatedScreen& screen);

struct TableRow {
  std::size_t id = 0;
  std::string kind;
  std::string content;
  Rect bbox;
  bool operator==(const TableRow&) const = default;
};

std::vector<TableRow> parse_element_table(std::string_view text);

/// Character grid, rows joined with '\n'. Requires cols >= 20, rows >= 10.
std::string render_text_screen(const AnnotatedScreen& screen, int cols = 100, int rows = 50);

struct Observation {
  std::string instruction;
  std::string foreground_title;
  std::vector<std::string> all_window_titles;
  std::string clipboard_text;
  std::string element_table;
  std::string text_rendering;
  AnnotatedScreen screen;
  std::optional<AnnotatedScreen> previous_screen;
};

void to_json(json& j, const Observation& o);

Observation build_observation(const envsim::DeviceState& state, const DetectorConfig& cfg,
                              const std::string& instruction,
                              const std::optional<AnnotatedScreen>& previous,
                              std::uint64_t seed);

/// Debug raster: binary PPM (P6), boxes in source colors, ids drawn at each
/// box's top-right corner.
std::string render_ppm(const AnnotatedScreen& screen, int width = 1440, int height = 900);

}  // namespace arena::observe
