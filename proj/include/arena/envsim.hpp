#pragma once

// Deterministic desktop simulator.
//
// All state changes funnel through apply_edit(): higher-level operations
// (events, config steps, timers) resolve declarative effects into a list of
// primitive StateEdits, apply them, and return them inside an EffectRecord.
// Replaying every record's edits onto reset() reproduces the final state.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/common.hpp"
#include "arena/taskspec.hpp"

namespace arena::envsim {

ARENA_DEFINE_ERROR(UnknownStep);
ARENA_DEFINE_ERROR(FixtureMissing);
ARENA_DEFINE_ERROR(ExecDenied);
ARENA_DEFINE_ERROR(OutOfRange);
ARENA_DEFINE_ERROR(NodeDisabled);
ARENA_DEFINE_ERROR(UnknownNode);
ARENA_DEFINE_ERROR(NoSuchProgram);
ARENA_DEFINE_ERROR(NoSuchWindowTitle);
ARENA_DEFINE_ERROR(NoFocusedInput);
ARENA_DEFINE_ERROR(EffectError);
ARENA_DEFINE_ERROR(SnapshotError);

/// Reference screen used to normalize pixel coordinates.
inline constexpr double kScreenWidthPx = 1440.0;
inline constexpr double kScreenHeightPx = 900.0;
/// Viewport shift per scroll call, in normalized units.
inline constexpr double kScrollStep = 0.25;

enum class NodeKind { button, text, input, image, icon, list_item, slider };
enum class EventKind { click, double_click, right_click, text_input, key, scroll };

std::string_view node_kind_name(NodeKind k);
NodeKind parse_node_kind(std::string_view s);
std::string_view event_name(EventKind e);
EventKind parse_event(std::string_view s);

enum class EffectKind {
  set_setting,     // target=app key=setting value=json (strings templated), coerce
  toggle_setting,  // target=app key=setting
  write_file,      // target=path value=text
  set_file_attr,   // target=path key=attr value=bool
  make_dir,        // target=path
  delete_file,     // target=path
  open_window,     // target=app
  close_window,    // target=window ("" = owning window)
  focus_window,    // target=window
  navigate,        // target=page key=fallback page
  set_content,     // target=node value=text
  set_title,       // value=title
  append_cookie,   // target=domain key=name value=value
  delete_cookies,  // target=domain substring ("" = all)
  transform_file,  // target=path key="strip_highlights" | "set_line" (value {line, text})
  schedule,        // delay=ticks then=effects
};

std::string_view effect_kind_name(EffectKind k);

/// Declarative state change attached to an app model. String fields may
/// contain templates, expanded when the effect runs:
///   ${node:ID}            content of node ID in the owning window
///   ${setting:APP:KEY}    settings value (strings verbatim, others as JSON)
///   ${doc} ${doc_name}    owning window's document path / its basename
///   ${doc_text}           contents of the owning window's document
///   ${payload}            event payload (typed text, key name)
struct Effect {
  EffectKind kind = EffectKind::set_setting;
  std::string target;
  std::string key;
  json value;
  std::string coerce;  // "", "number" or "bool"
  std::int64_t delay = 0;
  std::vector<Effect> then;

  bool operator==(const Effect&) const = default;
};

void to_json(json& j, const Effect& e);
void from_json(const json& j, Effect& e);

struct Behavior {
  EventKind event = EventKind::click;
  std::string key;  // key filter for key events; empty matches any key
  std::vector<Effect> effects;
  bool operator==(const Behavior&) const = default;
};

void to_json(json& j, const Behavior& b);
void from_json(const json& j, Behavior& b);

struct UiNode {
  std::string id;
  NodeKind kind = NodeKind::text;
  std::string content;
  std::string placeholder;  // shown when content is empty
  Rect bbox;
  std::int64_t z = 0;
  bool enabled = true;
  bool visible = true;
  bool scrolls = false;  // moves with the window viewport
  std::vector<Behavior> behaviors;

  const std::string& shown_text() const { return content.empty() ? placeholder : content; }
  bool operator==(const UiNode&) const = default;
};

struct Page {
  std::string title;  // templated; empty falls back to the app title
  std::vector<UiNode> nodes;
  std::vector<Behavior> window_behaviors;  // key bindings, default text handler
  std::vector<Effect> on_enter;
  double scroll_extent = 0.0;
};

struct AppModel {
  std::string name;
  std::vector<std::string> aliases;
  std::string title;
  std::string initial_page;
  std::map<std::string, Page> pages;
  json default_settings = json::object();

  const Page* page(std::string_view name) const;
};

class AppCatalog {
 public:
  void add(AppModel model);
  /// Lookup by canonical name or alias (case-insensitive).
  const AppModel* find(std::string_view name) const;
  const std::map<std::string, AppModel>& apps() const { return apps_; }
  std::vector<std::string> names() const;
  bool empty() const { return apps_.empty(); }

 private:
  std::map<std::string, AppModel> apps_;
  std::map<std::string, std::string> aliases_;
};

using FixtureStore = std::map<std::string, std::string>;

// ---------------------------------------------------------------------------
// Device state

struct FileNode {
  bool is_dir = false;
  std::string content;
  bool hidden = false;
  bool readonly = false;
  bool operator==(const FileNode&) const = default;
};

enum class ClipboardKind { empty, text, image };

struct Clipboard {
  ClipboardKind kind = ClipboardKind::empty;
  std::string text;  // text, or the description of a copied image
  bool operator==(const Clipboard&) const = default;
};

struct Cookie {
  std::string domain, name, value;
  bool operator==(const Cookie&) const = default;
};

struct Focus {
  std::string window, node;
  bool select_all = false;
  bool operator==(const Focus&) const = default;
};

struct Timer {
  std::uint64_t due = 0;
  std::string window;
  std::vector<Effect> effects;
  bool operator==(const Timer&) const = default;
};

struct WindowState {
  std::string id;
  std::string title;
  std::string app;
  std::string page;
  std::string document;
  double viewport = 0.0;
  double scroll_extent = 0.0;
  std::vector<UiNode> nodes;
  std::vector<Behavior> behaviors;

  const UiNode* find(std::string_view node_id) const;
  UiNode* find(std::string_view node_id);
  bool operator==(const WindowState&) const = default;
};

struct DeviceState {
  std::vector<WindowState> windows;  // z-order, front last
  std::map<std::string, FileNode> files;
  Clipboard clipboard;
  std::map<std::string, json> settings;
  std::vector<Cookie> cookies;
  std::optional<Focus> focus;
  std::vector<Timer> timers;
  std::uint64_t rng_seed = 0;
  std::uint64_t tick = 0;

  const WindowState* foreground() const { return windows.empty() ? nullptr : &windows.back(); }
  std::string foreground_id() const { return windows.empty() ? "" : windows.back().id; }
  const WindowState* window(std::string_view id) const;
  WindowState* window(std::string_view id);

  bool operator==(const DeviceState&) const = default;
};

inline constexpr const char* kUserHome = "C:\\Users\\Docker";
std::string user_path(std::string_view leaf);  // kUserHome + "\\" + leaf

// ---------------------------------------------------------------------------
// Edits and records

enum class EditOp {
  tick,
  open_window,
  close_window,
  focus_window,
  navigate,
  set_title,
  set_content,
  set_focus,
  clear_focus,
  set_viewport,
  set_setting,
  write_file,
  make_dir,
  delete_file,
  set_file_attr,
  set_clipboard,
  append_cookie,
  delete_cookies,
  add_timer,
  remove_timer,
};

std::string_view edit_op_name(EditOp op);

struct StateEdit {
  EditOp op;
  json args = json::object();
  bool operator==(const StateEdit&) const = default;
};

void to_json(json& j, const StateEdit& e);
void from_json(const json& j, StateEdit& e);

/// What one operation did. `kind` is "noop" when nothing changed.
struct EffectRecord {
  std::string kind;
  std::string event;
  std::string window;
  std::string node;
  std::vector<StateEdit> edits;

  bool operator==(const EffectRecord&) const = default;
};

void to_json(json& j, const EffectRecord& r);
void from_json(const json& j, EffectRecord& r);

/// The single mutation primitive.
void apply_edit(const AppCatalog& catalog, DeviceState& state, const StateEdit& edit);

// ---------------------------------------------------------------------------
// Operations. Each mutates `state` in place with the strong exception
// guarantee: on error the state is untouched.

/// Empty desktop, default folders, app default settings, tick 0.
DeviceState reset(const AppCatalog& catalog, std::uint64_t seed);

std::vector<EffectRecord> apply_config(const AppCatalog& catalog, const FixtureStore& fixtures,
                                       DeviceState& state,
                                       const std::vector<taskspec::ConfigStep>& steps);

EffectRecord apply_config_step(const AppCatalog& catalog, const FixtureStore& fixtures,
                               DeviceState& state, const taskspec::ConfigStep& step);

struct Hit {
  std::string window;
  std::string node;
  bool operator==(const Hit&) const = default;
};

/// Node of the foreground window under (x,y): highest z, then smallest
/// area, then least id. Throws OutOfRange outside the unit square.
std::optional<Hit> hit_test(const DeviceState& state, double x, double y);

/// On-screen rectangle of a node after viewport scrolling.
Rect displayed_bbox(const WindowState& window, const UiNode& node);
bool is_displayed(const WindowState& window, const UiNode& node);

EffectRecord dispatch_event(const AppCatalog& catalog, DeviceState& state,
                            const std::string& window, const std::string& node,
                            EventKind event, const std::string& payload = "");

/// Hit-test then deliver a pointer event; clicking an input focuses it.
EffectRecord pointer_event(const AppCatalog& catalog, DeviceState& state, double x, double y,
                           EventKind event);

EffectRecord tick_wait(const AppCatalog& catalog, DeviceState& state);
EffectRecord open_program(const AppCatalog& catalog, DeviceState& state, std::string_view name);
EffectRecord switch_to_window(DeviceState& state, std::string_view title);
EffectRecord type_text(const AppCatalog& catalog, DeviceState& state, const std::string& text);
EffectRecord press_key(const AppCatalog& catalog, DeviceState& state, std::string_view key);
EffectRecord set_clipboard(DeviceState& state, Clipboard clip);
EffectRecord paste(const AppCatalog& catalog, DeviceState& state);
/// direction is "up" or "down"; shifts the foreground viewport.
EffectRecord scroll(DeviceState& state, std::string_view direction);

DeviceState replay(const AppCatalog& catalog, std::uint64_t seed,
                   const std::vector<EffectRecord>& records);

// ---------------------------------------------------------------------------
// Snapshots (see docs/snapshot-format.md)

std::string snapshot(const DeviceState& state);
DeviceState parse_snapshot(std::string_view bytes);
std::string snapshot_digest(const DeviceState& state);

/// Strips `<hl>`/`</hl>` markers.
std::string strip_highlights(std::string_view text);
/// Replaces line `line` (0-based, split on LF) of `text`. Throws EffectError
/// when the line does not exist.
std::string set_line(std::string_view text, std::size_t line, const std::string& replacement);

/// Config steps understood by apply_config, with parameter schemas.
taskspec::StepRegistry default_step_registry();

}  // namespace arena::envsim
