#include "arena/envsim.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "arena/callexpr.hpp"

namespace arena::envsim {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names,
             const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  throw std::invalid_argument(std::string("unknown ") + what + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 7> kNodeKinds = {
    "button", "text", "input", "image", "icon", "list_item", "slider"};
constexpr std::array<std::string_view, 6> kEvents = {
    "click", "double_click", "right_click", "text_input", "key", "scroll"};
constexpr std::array<std::string_view, 16> kEffectKinds = {
    "set_setting",   "toggle_setting", "write_file",  "set_file_attr",
    "make_dir",      "delete_file",    "open_window", "close_window",
    "focus_window",  "navigate",       "set_content", "set_title",
    "append_cookie", "delete_cookies", "transform_file", "schedule"};
constexpr std::array<std::string_view, 20> kEditOps = {
    "tick",          "open_window",  "close_window", "focus_window",  "navigate",
    "set_title",     "set_content",  "set_focus",    "clear_focus",   "set_viewport",
    "set_setting",   "write_file",   "make_dir",     "delete_file",   "set_file_attr",
    "set_clipboard", "append_cookie", "delete_cookies", "add_timer",  "remove_timer"};

}  // namespace

std::string_view node_kind_name(NodeKind k) { return kNodeKinds[static_cast<int>(k)]; }
NodeKind parse_node_kind(std::string_view s) {
  return parse_enum<NodeKind>(s, kNodeKinds, "node kind");
}
std::string_view event_name(EventKind e) { return kEvents[static_cast<int>(e)]; }
EventKind parse_event(std::string_view s) { return parse_enum<EventKind>(s, kEvents, "event"); }
std::string_view effect_kind_name(EffectKind k) { return kEffectKinds[static_cast<int>(k)]; }
std::string_view edit_op_name(EditOp op) { return kEditOps[static_cast<int>(op)]; }

std::string user_path(std::string_view leaf) {
  return std::string(kUserHome) + "\\" + std::string(leaf);
}

// ---------------------------------------------------------------------------
// JSON conversions

void to_json(json& j, const Effect& e) {
  j = json::object();
  j["kind"] = effect_kind_name(e.kind);
  if (!e.target.empty()) j["target"] = e.target;
  if (!e.key.empty()) j["key"] = e.key;
  if (!e.value.is_null()) j["value"] = e.value;
  if (!e.coerce.empty()) j["coerce"] = e.coerce;
  if (e.delay != 0) j["delay"] = e.delay;
  if (!e.then.empty()) j["then"] = e.then;
}

void from_json(const json& j, Effect& e) {
  e = Effect{};
  e.kind = parse_enum<EffectKind>(j.at("kind").get<std::string>(), kEffectKinds, "effect");
  e.target = j.value("target", "");
  e.key = j.value("key", "");
  if (j.contains("value")) e.value = j.at("value");
  e.coerce = j.value("coerce", "");
  e.delay = j.value("delay", std::int64_t{0});
  if (j.contains("then")) e.then = j.at("then").get<std::vector<Effect>>();
}

void to_json(json& j, const Behavior& b) {
  j = json{{"event", event_name(b.event)}, {"effects", b.effects}};
  if (!b.key.empty()) j["key"] = b.key;
}

void from_json(const json& j, Behavior& b) {
  b.event = parse_event(j.at("event").get<std::string>());
  b.key = j.value("key", "");
  b.effects = j.at("effects").get<std::vector<Effect>>();
}

void to_json(json& j, const StateEdit& e) {
  j = json{{"op", edit_op_name(e.op)}, {"args", e.args}};
}

void from_json(const json& j, StateEdit& e) {
  e.op = parse_enum<EditOp>(j.at("op").get<std::string>(), kEditOps, "edit op");
  e.args = j.value("args", json::object());
}

void to_json(json& j, const EffectRecord& r) {
  j = json{{"kind", r.kind}, {"edits", r.edits}};
  if (!r.event.empty()) j["event"] = r.event;
  if (!r.window.empty()) j["window"] = r.window;
  if (!r.node.empty()) j["node"] = r.node;
}

void from_json(const json& j, EffectRecord& r) {
  r.kind = j.at("kind").get<std::string>();
  r.event = j.value("event", "");
  r.window = j.value("window", "");
  r.node = j.value("node", "");
  r.edits = j.value("edits", std::vector<StateEdit>{});
}

// ---------------------------------------------------------------------------
// Catalog and state lookups

const Page* AppModel::page(std::string_view n) const {
  auto it = pages.find(std::string(n));
  return it == pages.end() ? nullptr : &it->second;
}

void AppCatalog::add(AppModel model) {
  const std::string name = model.name;
  aliases_[to_lower(name)] = name;
  for (const auto& a : model.aliases) aliases_[to_lower(a)] = name;
  apps_[name] = std::move(model);
}

const AppModel* AppCatalog::find(std::string_view name) const {
  auto it = aliases_.find(to_lower(trim(name)));
  if (it == aliases_.end()) return nullptr;
  return &apps_.at(it->second);
}

std::vector<std::string> AppCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : apps_) out.push_back(n);
  return out;
}

const UiNode* WindowState::find(std::string_view node_id) const {
  for (const auto& n : nodes) {
    if (n.id == node_id) return &n;
  }
  return nullptr;
}

UiNode* WindowState::find(std::string_view node_id) {
  for (auto& n : nodes) {
    if (n.id == node_id) return &n;
  }
  return nullptr;
}

const WindowState* DeviceState::window(std::string_view id) const {
  for (const auto& w : windows) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

WindowState* DeviceState::window(std::string_view id) {
  for (auto& w : windows) {
    if (w.id == id) return &w;
  }
  return nullptr;
}

std::string strip_highlights(std::string_view text) {
  std::string out(text);
  for (const char* tag : {"<hl>", "</hl>"}) {
    std::string t(tag);
    for (auto p = out.find(t); p != std::string::npos; p = out.find(t, p)) out.erase(p, t.size());
  }
  return out;
}

std::string set_line(std::string_view text, std::size_t line, const std::string& replacement) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  if (line >= lines.size()) throw EffectError("line " + std::to_string(line) + " out of range");
  lines[line] = replacement;
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

// ---------------------------------------------------------------------------
// apply_edit

namespace {

std::string str_arg(const StateEdit& e, const char* name) {
  auto it = e.args.find(name);
  if (it == e.args.end() || !it->is_string()) {
    throw EffectError(std::string(edit_op_name(e.op)) + ": missing string argument '" + name + "'");
  }
  return it->get<std::string>();
}

WindowState& need_window(DeviceState& s, const std::string& id) {
  WindowState* w = s.window(id);
  if (!w) throw EffectError("no window '" + id + "'");
  return *w;
}

void load_page(WindowState& w, const AppModel& app, const std::string& page_name) {
  const Page* page = app.page(page_name);
  if (!page) throw EffectError("app '" + app.name + "' has no page '" + page_name + "'");
  w.page = page_name;
  w.nodes = page->nodes;
  w.behaviors = page->window_behaviors;
  w.scroll_extent = page->scroll_extent;
  w.viewport = 0.0;
}

void drop_focus_in(DeviceState& s, const std::string& window) {
  if (s.focus && s.focus->window == window) s.focus.reset();
}

}  // namespace

void apply_edit(const AppCatalog& catalog, DeviceState& s, const StateEdit& e) {
  switch (e.op) {
    case EditOp::tick: {
      auto t = e.args.at("value").get<std::uint64_t>();
      if (t < s.tick) throw EffectError("tick cannot move backwards");
      s.tick = t;
      break;
    }
    case EditOp::open_window: {
      const std::string app_name = str_arg(e, "app");
      const AppModel* app = catalog.find(app_name);
      if (!app) throw NoSuchProgram("no program named '" + app_name + "'");
      WindowState w;
      w.id = str_arg(e, "window");
      w.app = app->name;
      w.title = str_arg(e, "title");
      w.document = e.args.value("document", "");
      load_page(w, *app, str_arg(e, "page"));
      std::erase_if(s.windows, [&](const WindowState& x) { return x.id == w.id; });
      drop_focus_in(s, w.id);
      s.windows.push_back(std::move(w));
      break;
    }
    case EditOp::close_window: {
      const std::string id = str_arg(e, "window");
      need_window(s, id);
      std::erase_if(s.windows, [&](const WindowState& x) { return x.id == id; });
      drop_focus_in(s, id);
      std::erase_if(s.timers, [&](const Timer& t) { return t.window == id; });
      break;
    }
    case EditOp::focus_window: {
      const std::string id = str_arg(e, "window");
      auto it = std::find_if(s.windows.begin(), s.windows.end(),
                             [&](const WindowState& x) { return x.id == id; });
      if (it == s.windows.end()) throw EffectError("no window '" + id + "'");
      std::rotate(it, it + 1, s.windows.end());
      break;
    }
    case EditOp::navigate: {
      WindowState& w = need_window(s, str_arg(e, "window"));
      const AppModel* app = catalog.find(w.app);
      if (!app) throw EffectError("unknown app '" + w.app + "'");
      load_page(w, *app, str_arg(e, "page"));
      w.title = str_arg(e, "title");
      drop_focus_in(s, w.id);
      break;
    }
    case EditOp::set_title:
      need_window(s, str_arg(e, "window")).title = str_arg(e, "title");
      break;
    case EditOp::set_content: {
      WindowState& w = need_window(s, str_arg(e, "window"));
      UiNode* n = w.find(str_arg(e, "node"));
      if (!n) throw UnknownNode("no node '" + str_arg(e, "node") + "' in window '" + w.id + "'");
      n->content = str_arg(e, "text");
      break;
    }
    case EditOp::set_focus: {
      WindowState& w = need_window(s, str_arg(e, "window"));
      if (!w.find(str_arg(e, "node"))) throw UnknownNode("no node '" + str_arg(e, "node") + "'");
      s.focus = Focus{w.id, str_arg(e, "node"), e.args.value("select_all", false)};
      break;
    }
    case EditOp::clear_focus:
      s.focus.reset();
      break;
    case EditOp::set_viewport:
      need_window(s, str_arg(e, "window")).viewport = e.args.at("value").get<double>();
      break;
    case EditOp::set_setting: {
      json& app = s.settings[str_arg(e, "app")];
      if (!app.is_object()) app = json::object();
      app[str_arg(e, "key")] = e.args.at("value");
      break;
    }
    case EditOp::write_file: {
      FileNode& f = s.files[str_arg(e, "path")];
      if (f.is_dir) throw EffectError("'" + str_arg(e, "path") + "' is a directory");
      f.content = str_arg(e, "content");
      break;
    }
    case EditOp::make_dir: {
      FileNode& f = s.files[str_arg(e, "path")];
      if (!f.is_dir && !f.content.empty()) throw EffectError("'" + str_arg(e, "path") + "' is a file");
      f.is_dir = true;
      break;
    }
    case EditOp::delete_file: {
      if (s.files.erase(str_arg(e, "path")) == 0) {
        throw EffectError("no such file '" + str_arg(e, "path") + "'");
      }
      break;
    }
    case EditOp::set_file_attr: {
      auto it = s.files.find(str_arg(e, "path"));
      if (it == s.files.end()) throw EffectError("no such file '" + str_arg(e, "path") + "'");
      const std::string attr = str_arg(e, "attr");
      bool v = e.args.at("value").get<bool>();
      if (attr == "hidden") it->second.hidden = v;
      else if (attr == "readonly") it->second.readonly = v;
      else throw EffectError("unknown file attribute '" + attr + "'");
      break;
    }
    case EditOp::set_clipboard: {
      const std::string kind = str_arg(e, "kind");
      Clipboard c;
      if (kind == "text") c.kind = ClipboardKind::text;
      else if (kind == "image") c.kind = ClipboardKind::image;
      else if (kind != "empty") throw EffectError("bad clipboard kind '" + kind + "'");
      c.text = e.args.value("text", "");
      s.clipboard = c;
      break;
    }
    case EditOp::append_cookie:
      s.cookies.push_back({str_arg(e, "domain"), str_arg(e, "name"), str_arg(e, "value")});
      break;
    case EditOp::delete_cookies: {
      const std::string match = str_arg(e, "match");
      std::erase_if(s.cookies, [&](const Cookie& c) {
        return match.empty() || c.domain.find(match) != std::string::npos;
      });
      break;
    }
    case EditOp::add_timer:
      s.timers.push_back({e.args.at("due").get<std::uint64_t>(), str_arg(e, "window"),
                          e.args.at("effects").get<std::vector<Effect>>()});
      break;
    case EditOp::remove_timer: {
      auto i = e.args.at("index").get<std::size_t>();
      if (i >= s.timers.size()) throw EffectError("no timer at index " + std::to_string(i));
      s.timers.erase(s.timers.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
}

// ---------------------------------------------------------------------------
// Effect resolution

namespace {

struct Ctx {
  std::string window;
  std::string payload;
};

/// Accumulates edits for one operation while applying them to a working copy.
class Run {
 public:
  Run(const AppCatalog& catalog, DeviceState& work) : catalog_(catalog), s_(work) {}

  void edit(EditOp op, json args) {
    StateEdit e{op, std::move(args)};
    apply_edit(catalog_, s_, e);
    edits_.push_back(std::move(e));
  }

  std::string expand(const std::string& text, const Ctx& ctx) const {
    std::string out;
    std::size_t i = 0;
    while (i < text.size()) {
      auto open = text.find("${", i);
      if (open == std::string::npos) {
        out.append(text, i, std::string::npos);
        break;
      }
      out.append(text, i, open - i);
      auto close = text.find('}', open);
      if (close == std::string::npos) throw EffectError("unterminated template in '" + text + "'");
      out += resolve(text.substr(open + 2, close - open - 2), ctx);
      i = close + 1;
    }
    return out;
  }

  void run(const std::vector<Effect>& effects, const Ctx& ctx, int depth = 0) {
    if (depth > 8) throw EffectError("effect recursion too deep");
    for (const auto& e : effects) run_one(e, ctx, depth);
  }

  void open_app(const AppModel& app, const std::string& document, int depth) {
    if (s_.window(app.name)) {
      edit(EditOp::focus_window, {{"window", app.name}});
      return;
    }
    Ctx ctx{app.name, ""};
    const Page* page = app.page(app.initial_page);
    if (!page) throw EffectError("app '" + app.name + "' has no initial page");
    // Titles may reference ${doc}; resolve against a provisional context.
    std::string title = page->title.empty() ? app.title : page->title;
    title = expand(expand_with_doc(title, document), ctx);
    edit(EditOp::open_window, {{"app", app.name},
                               {"window", app.name},
                               {"page", app.initial_page},
                               {"title", title},
                               {"document", document}});
    run(page->on_enter, ctx, depth + 1);
  }

  /// Appends edits that were already applied to the working state.
  void adopt(std::vector<StateEdit> done) {
    for (auto& e : done) edits_.push_back(std::move(e));
  }

  DeviceState& state() { return s_; }
  std::vector<StateEdit> take() { return std::move(edits_); }
  const std::vector<StateEdit>& edits() const { return edits_; }

 private:
  std::string expand_with_doc(const std::string& text, const std::string& doc) const {
    std::string out = text;
    auto sub = [&](const std::string& from, const std::string& to) {
      for (auto p = out.find(from); p != std::string::npos; p = out.find(from, p + to.size())) {
        out.replace(p, from.size(), to);
      }
    };
    sub("${doc_name}", basename(doc));
    sub("${doc}", doc);
    return out;
  }

  static std::string basename(const std::string& path) {
    auto p = path.find_last_of("\\/");
    return p == std::string::npos ? path : path.substr(p + 1);
  }

  std::string resolve(const std::string& token, const Ctx& ctx) const {
    const WindowState* w = s_.window(ctx.window);
    if (token == "payload") return ctx.payload;
    if (token == "doc" || token == "doc_name" || token == "doc_text") {
      if (!w) throw EffectError("template '" + token + "' needs a window");
      if (token == "doc") return w->document;
      if (token == "doc_name") return basename(w->document);
      auto it = s_.files.find(w->document);
      return it == s_.files.end() ? "" : it->second.content;
    }
    if (token.rfind("node:", 0) == 0) {
      if (!w) throw EffectError("template '" + token + "' needs a window");
      const UiNode* n = w->find(token.substr(5));
      if (!n) throw UnknownNode("template references unknown node '" + token.substr(5) + "'");
      return n->content;
    }
    if (token.rfind("setting:", 0) == 0) {
      auto rest = token.substr(8);
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw EffectError("bad setting template '" + token + "'");
      auto it = s_.settings.find(rest.substr(0, colon));
      if (it == s_.settings.end() || !it->second.contains(rest.substr(colon + 1))) return "";
      const json& v = it->second.at(rest.substr(colon + 1));
      return v.is_string() ? v.get<std::string>() : v.dump();
    }
    throw EffectError("unknown template '${" + token + "}'");
  }

  json resolve_value(const Effect& e, const Ctx& ctx) const {
    json v = e.value;
    if (v.is_string()) v = expand(v.get<std::string>(), ctx);
    if (e.coerce.empty()) return v;
    const std::string text = v.is_string() ? trim(v.get<std::string>()) : v.dump();
    if (e.coerce == "number") {
      char* end = nullptr;
      double d = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(d)) {
        throw EffectError("'" + text + "' is not a number");
      }
      if (d == std::floor(d) && std::fabs(d) < 9.0e15) return static_cast<std::int64_t>(d);
      return d;
    }
    if (e.coerce == "bool") {
      std::string l = to_lower(text);
      if (l == "true" || l == "1" || l == "on") return true;
      if (l == "false" || l == "0" || l == "off") return false;
      throw EffectError("'" + text + "' is not a boolean");
    }
    throw EffectError("unknown coercion '" + e.coerce + "'");
  }

  std::string value_text(const Effect& e, const Ctx& ctx) const {
    json v = resolve_value(e, ctx);
    return v.is_string() ? v.get<std::string>() : v.dump();
  }

  void run_one(const Effect& e, const Ctx& ctx, int depth) {
    switch (e.kind) {
      case EffectKind::set_setting:
        edit(EditOp::set_setting,
             {{"app", expand(e.target, ctx)}, {"key", expand(e.key, ctx)}, {"value", resolve_value(e, ctx)}});
        break;
      case EffectKind::toggle_setting: {
        const std::string app = expand(e.target, ctx), key = expand(e.key, ctx);
        bool cur = false;
        auto it = s_.settings.find(app);
        if (it != s_.settings.end() && it->second.contains(key) && it->second.at(key).is_boolean()) {
          cur = it->second.at(key).get<bool>();
        }
        edit(EditOp::set_setting, {{"app", app}, {"key", key}, {"value", !cur}});
        break;
      }
      case EffectKind::write_file:
        edit(EditOp::write_file, {{"path", expand(e.target, ctx)}, {"content", value_text(e, ctx)}});
        break;
      case EffectKind::set_file_attr:
        edit(EditOp::set_file_attr,
             {{"path", expand(e.target, ctx)}, {"attr", e.key}, {"value", resolve_value(e, ctx)}});
        break;
      case EffectKind::make_dir:
        edit(EditOp::make_dir, {{"path", expand(e.target, ctx)}});
        break;
      case EffectKind::delete_file:
        edit(EditOp::delete_file, {{"path", expand(e.target, ctx)}});
        break;
      case EffectKind::open_window: {
        const AppModel* app = catalog_.find(expand(e.target, ctx));
        if (!app) throw NoSuchProgram("no program named '" + e.target + "'");
        open_app(*app, "", depth);
        break;
      }
      case EffectKind::close_window: {
        std::string id = e.target.empty() ? ctx.window : expand(e.target, ctx);
        edit(EditOp::close_window, {{"window", id}});
        break;
      }
      case EffectKind::focus_window:
        edit(EditOp::focus_window, {{"window", expand(e.target, ctx)}});
        break;
      case EffectKind::navigate: {
        const WindowState* w = s_.window(ctx.window);
        if (!w) throw EffectError("navigate needs a window");
        const AppModel* app = catalog_.find(w->app);
        std::string page_name = expand(e.target, ctx);
        if (!app->page(page_name)) {
          if (e.key.empty()) throw EffectError("no page '" + page_name + "' in '" + app->name + "'");
          page_name = e.key;
        }
        const Page* page = app->page(page_name);
        if (!page) throw EffectError("no page '" + page_name + "' in '" + app->name + "'");
        std::string title = page->title.empty() ? app->title : page->title;
        title = expand(title, ctx);
        edit(EditOp::navigate, {{"window", w->id}, {"page", page_name}, {"title", title}});
        run(page->on_enter, ctx, depth + 1);
        break;
      }
      case EffectKind::set_content:
        edit(EditOp::set_content,
             {{"window", ctx.window}, {"node", e.target}, {"text", value_text(e, ctx)}});
        break;
      case EffectKind::set_title:
        edit(EditOp::set_title, {{"window", ctx.window}, {"title", value_text(e, ctx)}});
        break;
      case EffectKind::append_cookie:
        edit(EditOp::append_cookie,
             {{"domain", expand(e.target, ctx)}, {"name", expand(e.key, ctx)}, {"value", value_text(e, ctx)}});
        break;
      case EffectKind::delete_cookies:
        edit(EditOp::delete_cookies, {{"match", expand(e.target, ctx)}});
        break;
      case EffectKind::transform_file: {
        const std::string path = expand(e.target, ctx);
        auto it = s_.files.find(path);
        if (it == s_.files.end() || it->second.is_dir) throw EffectError("no such file '" + path + "'");
        std::string out;
        if (e.key == "strip_highlights") {
          out = strip_highlights(it->second.content);
        } else if (e.key == "set_line") {
          if (!e.value.is_object() || !e.value.contains("line") || !e.value.at("line").is_number_integer() ||
              e.value.at("line").get<std::int64_t>() < 0 ||
              !e.value.contains("text") || !e.value.at("text").is_string()) {
            throw EffectError("set_line needs {line, text}");
          }
          out = set_line(it->second.content, e.value.at("line").get<std::size_t>(),
                         expand(e.value.at("text").get<std::string>(), ctx));
        } else {
          throw EffectError("unknown transform '" + e.key + "'");
        }
        edit(EditOp::write_file, {{"path", path}, {"content", out}});
        break;
      }
      case EffectKind::schedule:
        edit(EditOp::add_timer, {{"due", s_.tick + static_cast<std::uint64_t>(std::max<std::int64_t>(1, e.delay))},
                                 {"window", ctx.window},
                                 {"effects", e.then}});
        break;
    }
  }

  const AppCatalog& catalog_;
  DeviceState& s_;
  std::vector<StateEdit> edits_;
};

/// Runs `body` against a copy of `state`; commits only if it returns.
template <typename F>
EffectRecord transact(const AppCatalog& catalog, DeviceState& state, EffectRecord rec, F&& body) {
  DeviceState work = state;
  Run run(catalog, work);
  body(run);
  rec.edits = run.take();
  if (rec.edits.empty()) rec.kind = "noop";
  state = std::move(work);
  return rec;
}

bool key_matches(const Behavior& b, std::string_view key) {
  return b.event == EventKind::key && (b.key.empty() || to_lower(b.key) == key);
}

const UiNode* focused_input(const DeviceState& s) {
  if (!s.focus || s.focus->window != s.foreground_id()) return nullptr;
  const WindowState* w = s.window(s.focus->window);
  const UiNode* n = w ? w->find(s.focus->node) : nullptr;
  if (!n || n->kind != NodeKind::input || !n->enabled) return nullptr;
  return n;
}

// Removes the last UTF-8 code point.
void pop_utf8(std::string& s) {
  while (!s.empty()) {
    unsigned char c = static_cast<unsigned char>(s.back());
    s.pop_back();
    if ((c & 0xC0) != 0x80) break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations

DeviceState reset(const AppCatalog& catalog, std::uint64_t seed) {
  DeviceState s;
  s.rng_seed = seed;
  s.files[kUserHome].is_dir = true;
  for (const char* leaf : {"Desktop", "Documents", "Downloads", "Pictures"}) {
    s.files[user_path(leaf)].is_dir = true;
  }
  for (const auto& [name, app] : catalog.apps()) {
    if (app.default_settings.is_object() && !app.default_settings.empty()) {
      s.settings[name] = app.default_settings;
    }
  }
  return s;
}

Rect displayed_bbox(const WindowState& w, const UiNode& n) {
  if (!n.scrolls) return n.bbox;
  Rect r = n.bbox;
  r.y1 -= w.viewport;
  r.y2 -= w.viewport;
  return r;
}

bool is_displayed(const WindowState& w, const UiNode& n) {
  if (!n.visible) return false;
  Rect r = displayed_bbox(w, n);
  return r.y1 >= 0.0 && r.y2 <= 1.0 && r.x1 >= 0.0 && r.x2 <= 1.0;
}

std::optional<Hit> hit_test(const DeviceState& s, double x, double y) {
  if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
    throw OutOfRange("point (" + format_trimmed(x, 4) + ", " + format_trimmed(y, 4) +
                     ") is outside the screen");
  }
  const WindowState* w = s.foreground();
  if (!w) return std::nullopt;
  const UiNode* best = nullptr;
  for (const auto& n : w->nodes) {
    if (!is_displayed(*w, n) || !displayed_bbox(*w, n).contains(x, y)) continue;
    if (!best) {
      best = &n;
      continue;
    }
    auto key = [&](const UiNode& m) {
      return std::make_tuple(-m.z, displayed_bbox(*w, m).area(), m.id);
    };
    if (key(n) < key(*best)) best = &n;
  }
  if (!best) return std::nullopt;
  return Hit{w->id, best->id};
}

EffectRecord dispatch_event(const AppCatalog& catalog, DeviceState& state, const std::string& window,
                            const std::string& node, EventKind event, const std::string& payload) {
  const WindowState* w = state.window(window);
  if (!w) throw EffectError("no window '" + window + "'");
  const UiNode* n = w->find(node);
  if (!n) throw UnknownNode("no node '" + node + "' in window '" + window + "'");
  if (!n->enabled) throw NodeDisabled("node '" + node + "' is disabled");
  EffectRecord rec{"dispatch", std::string(event_name(event)), window, node, {}};
  std::vector<Effect> effects;
  for (const auto& b : n->behaviors) {
    if (b.event != event) continue;
    if (event == EventKind::key && !key_matches(b, to_lower(payload))) continue;
    effects.insert(effects.end(), b.effects.begin(), b.effects.end());
  }
  return transact(catalog, state, rec, [&](Run& run) { run.run(effects, {window, payload}); });
}

EffectRecord pointer_event(const AppCatalog& catalog, DeviceState& state, double x, double y,
                           EventKind event) {
  auto hit = hit_test(state, x, y);
  EffectRecord rec{"dispatch", std::string(event_name(event)), "", "", {}};
  if (!hit) {
    // Clicking empty space still drops keyboard focus.
    return transact(catalog, state, rec, [&](Run& run) {
      if (run.state().focus) run.edit(EditOp::clear_focus, json::object());
    });
  }
  rec.window = hit->window;
  rec.node = hit->node;
  const UiNode* n = state.window(hit->window)->find(hit->node);
  if (!n->enabled) throw NodeDisabled("node '" + hit->node + "' is disabled");
  std::vector<Effect> effects;
  for (const auto& b : n->behaviors) {
    if (b.event == event) effects.insert(effects.end(), b.effects.begin(), b.effects.end());
  }
  const bool is_input = n->kind == NodeKind::input;
  return transact(catalog, state, rec, [&](Run& run) {
    const auto& f = run.state().focus;
    if (is_input) {
      Focus want{hit->window, hit->node, false};
      if (!f || !(*f == want)) run.edit(EditOp::set_focus, {{"window", hit->window}, {"node", hit->node}});
    } else if (f) {
      run.edit(EditOp::clear_focus, json::object());
    }
    run.run(effects, {hit->window, ""});
  });
}

EffectRecord tick_wait(const AppCatalog& catalog, DeviceState& state) {
  EffectRecord rec{"tick", "wait", "", "", {}};
  return transact(catalog, state, rec, [&](Run& run) {
    DeviceState& s = run.state();
    run.edit(EditOp::tick, {{"value", s.tick + 1}});
    // Fire due timers in insertion order; effects may schedule more.
    for (std::size_t i = 0; i < s.timers.size();) {
      if (s.timers[i].due > s.tick) {
        ++i;
        continue;
      }
      Timer t = s.timers[i];
      run.edit(EditOp::remove_timer, {{"index", i}});
      if (s.window(t.window)) run.run(t.effects, {t.window, ""});
    }
  });
}

EffectRecord open_program(const AppCatalog& catalog, DeviceState& state, std::string_view name) {
  const AppModel* app = catalog.find(name);
  if (!app) throw NoSuchProgram("no program named '" + std::string(name) + "'");
  EffectRecord rec{"open_program", "", app->name, "", {}};
  return transact(catalog, state, rec, [&](Run& run) {
    if (state.foreground_id() == app->name) return;
    run.open_app(*app, "", 0);
  });
}

EffectRecord switch_to_window(DeviceState& state, std::string_view title) {
  const WindowState* target = nullptr;
  for (const auto& w : state.windows) {
    if (w.title == title) target = &w;
  }
  if (!target) throw NoSuchWindowTitle("no window titled '" + std::string(title) + "'");
  EffectRecord rec{"switch", "", target->id, "", {}};
  if (state.foreground_id() != target->id) {
    StateEdit e{EditOp::focus_window, {{"window", target->id}}};
    AppCatalog none;
    apply_edit(none, state, e);
    rec.edits.push_back(std::move(e));
  } else {
    rec.kind = "noop";
  }
  return rec;
}

EffectRecord type_text(const AppCatalog& catalog, DeviceState& state, const std::string& text) {
  if (const UiNode* n = focused_input(state)) {
    const std::string window = state.focus->window, node = n->id;
    const bool replace = state.focus->select_all;
    std::vector<Effect> effects;
    for (const auto& b : n->behaviors) {
      if (b.event == EventKind::text_input) effects.insert(effects.end(), b.effects.begin(), b.effects.end());
    }
    std::string content = replace ? text : n->content + text;
    EffectRecord rec{"type", "text_input", window, node, {}};
    return transact(catalog, state, rec, [&](Run& run) {
      run.edit(EditOp::set_content, {{"window", window}, {"node", node}, {"text", content}});
      if (replace) run.edit(EditOp::set_focus, {{"window", window}, {"node", node}});
      run.run(effects, {window, text});
    });
  }
  const WindowState* w = state.foreground();
  if (w) {
    std::vector<Effect> effects;
    for (const auto& b : w->behaviors) {
      if (b.event == EventKind::text_input) effects.insert(effects.end(), b.effects.begin(), b.effects.end());
    }
    if (!effects.empty()) {
      EffectRecord rec{"type", "text_input", w->id, "", {}};
      const std::string window = w->id;
      return transact(catalog, state, rec, [&](Run& run) { run.run(effects, {window, text}); });
    }
  }
  throw NoFocusedInput("no focused input to receive text");
}

EffectRecord press_key(const AppCatalog& catalog, DeviceState& state, std::string_view raw) {
  const std::string key = to_lower(trim(raw));
  if (key.empty()) throw EffectError("empty key name");
  const WindowState* w = state.foreground();
  if (!w) throw NoFocusedInput("no window to receive key '" + key + "'");
  const std::string window = w->id;
  EffectRecord rec{"key", key, window, "", {}};

  const UiNode* n = focused_input(state);
  std::vector<Effect> node_effects, window_effects;
  if (n) {
    rec.node = n->id;
    for (const auto& b : n->behaviors) {
      if (key_matches(b, key)) node_effects.insert(node_effects.end(), b.effects.begin(), b.effects.end());
    }
  }
  for (const auto& b : w->behaviors) {
    if (key_matches(b, key)) window_effects.insert(window_effects.end(), b.effects.begin(), b.effects.end());
  }
  const bool builtin = n && (key == "backspace" || key == "ctrl+a" || key == "delete");
  return transact(catalog, state, rec, [&](Run& run) {
    if (builtin) {
      const bool sel = run.state().focus->select_all;
      std::string content = n->content;
      if (key == "ctrl+a") {
        if (!sel) run.edit(EditOp::set_focus, {{"window", window}, {"node", n->id}, {"select_all", true}});
      } else {
        if (sel) content.clear();
        else if (key == "backspace") pop_utf8(content);
        if (content != n->content) {
          run.edit(EditOp::set_content, {{"window", window}, {"node", n->id}, {"text", content}});
        }
        if (sel) run.edit(EditOp::set_focus, {{"window", window}, {"node", n->id}});
      }
    }
    if (!node_effects.empty()) {
      run.run(node_effects, {window, key});
    } else if (!builtin) {
      run.run(window_effects, {window, key});
    }
  });
}

EffectRecord set_clipboard(DeviceState& state, Clipboard clip) {
  EffectRecord rec{"clipboard", "copy", "", "", {}};
  if (state.clipboard == clip) {
    rec.kind = "noop";
    return rec;
  }
  const char* kind = clip.kind == ClipboardKind::text    ? "text"
                     : clip.kind == ClipboardKind::image ? "image"
                                                         : "empty";
  StateEdit e{EditOp::set_clipboard, {{"kind", kind}, {"text", clip.text}}};
  AppCatalog none;
  apply_edit(none, state, e);
  rec.edits.push_back(std::move(e));
  return rec;
}

EffectRecord paste(const AppCatalog& catalog, DeviceState& state) {
  if (state.clipboard.kind == ClipboardKind::empty) return EffectRecord{"noop", "paste", "", "", {}};
  EffectRecord r = type_text(catalog, state, state.clipboard.text);
  r.event = "paste";
  return r;
}

EffectRecord scroll(DeviceState& state, std::string_view direction) {
  const std::string dir = to_lower(direction);
  if (dir != "up" && dir != "down") throw EffectError("scroll direction must be 'up' or 'down'");
  EffectRecord rec{"scroll", dir, state.foreground_id(), "", {}};
  const WindowState* w = state.foreground();
  if (!w) {
    rec.kind = "noop";
    return rec;
  }
  double v = w->viewport + (dir == "down" ? kScrollStep : -kScrollStep);
  v = std::clamp(v, 0.0, w->scroll_extent);
  if (v == w->viewport) {
    rec.kind = "noop";
    return rec;
  }
  StateEdit e{EditOp::set_viewport, {{"window", w->id}, {"value", v}}};
  AppCatalog none;
  apply_edit(none, state, e);
  rec.edits.push_back(std::move(e));
  return rec;
}

DeviceState replay(const AppCatalog& catalog, std::uint64_t seed,
                   const std::vector<EffectRecord>& records) {
  DeviceState s = reset(catalog, seed);
  for (const auto& r : records) {
    for (const auto& e : r.edits) apply_edit(catalog, s, e);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Config steps

namespace {

std::string param_str(const taskspec::ConfigStep& step, const char* name) {
  auto it = step.parameters.find(name);
  if (it == step.parameters.end() || !it->is_string()) {
    throw taskspec::SchemaError("config." + step.type + "." + name, "expected string");
  }
  return it->get<std::string>();
}

std::string exec_script(const taskspec::ConfigStep& step) {
  const json& cmd = step.parameters.at("command");
  if (cmd.is_string()) return cmd.get<std::string>();
  if (cmd.is_array() && cmd.size() == 3 && cmd[0].is_string() && cmd[1].is_string() &&
      cmd[2].is_string()) {
    const std::string interp = cmd[0].get<std::string>();
    if ((interp == "python" || interp == "python3") && cmd[1].get<std::string>() == "-c") {
      return cmd[2].get<std::string>();
    }
  }
  throw ExecDenied("only `python -c <script>` commands are allowed");
}

void run_exec(const AppCatalog& catalog, Run& run, const std::string& script) {
  for (const auto& stmt : callexpr::split_statements(script)) {
    if (stmt == "import pyautogui" || stmt == "import time") continue;
    callexpr::CallExpr call;
    try {
      call = callexpr::parse_statement(stmt);
    } catch (const callexpr::SyntaxError& e) {
      throw ExecDenied("statement not allowed: " + stmt);
    }
    const std::string fn = call.dotted();
    if (!call.kwargs.empty()) throw ExecDenied("keyword arguments not allowed: " + stmt);
    auto num = [&](std::size_t i) {
      auto v = i < call.args.size() ? callexpr::as_number(call.args[i]) : std::nullopt;
      if (!v) throw ExecDenied("numeric argument expected: " + stmt);
      return *v;
    };
    if ((fn == "pyautogui.click" || fn == "click_at") && call.args.size() == 2) {
      double x = num(0) / kScreenWidthPx, y = num(1) / kScreenHeightPx;
      run.adopt(pointer_event(catalog, run.state(), x, y, EventKind::click).edits);
    } else if ((fn == "time.sleep" || fn == "sleep") && call.args.size() == 1) {
      double secs = num(0);
      if (secs < 0) throw ExecDenied("negative sleep");
      auto ticks = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::ceil(secs)));
      for (std::uint64_t i = 0; i < ticks; ++i) {
        run.adopt(tick_wait(catalog, run.state()).edits);
      }
    } else if (fn == "write_file" && call.args.size() == 2 &&
               std::holds_alternative<std::string>(call.args[0]) &&
               std::holds_alternative<std::string>(call.args[1])) {
      run.edit(EditOp::write_file, {{"path", std::get<std::string>(call.args[0])},
                                    {"content", std::get<std::string>(call.args[1])}});
    } else {
      throw ExecDenied("statement not allowed: " + stmt);
    }
  }
}

}  // namespace

EffectRecord apply_config_step(const AppCatalog& catalog, const FixtureStore& fixtures,
                               DeviceState& state, const taskspec::ConfigStep& step) {
  EffectRecord rec{"config", step.type, "", "", {}};
  const std::string& t = step.type;
  if (t == "launch") {
    const std::string cmd = param_str(step, "command");
    const AppModel* app = catalog.find(cmd);
    if (!app) throw NoSuchProgram("no program named '" + cmd + "'");
    rec.window = app->name;
    return transact(catalog, state, rec, [&](Run& run) { run.open_app(*app, "", 0); });
  }
  if (t == "execute") {
    const std::string script = exec_script(step);
    return transact(catalog, state, rec, [&](Run& run) { run_exec(catalog, run, script); });
  }
  if (t == "download") {
    const std::string fixture = param_str(step, "fixture");
    auto it = fixtures.find(fixture);
    if (it == fixtures.end()) throw FixtureMissing("no fixture named '" + fixture + "'");
    const std::string path = param_str(step, "path");
    return transact(catalog, state, rec, [&](Run& run) {
      run.edit(EditOp::write_file, {{"path", path}, {"content", it->second}});
    });
  }
  if (t == "open_file") {
    const std::string path = param_str(step, "path");
    const std::string app_name = param_str(step, "app");
    const AppModel* app = catalog.find(app_name);
    if (!app) throw NoSuchProgram("no program named '" + app_name + "'");
    auto f = state.files.find(path);
    if (f == state.files.end() || f->second.is_dir) {
      throw FixtureMissing("cannot open '" + path + "': no such file");
    }
    rec.window = app->name;
    return transact(catalog, state, rec, [&](Run& run) {
      if (run.state().window(app->name)) run.edit(EditOp::close_window, {{"window", app->name}});
      run.open_app(*app, path, 0);
    });
  }
  if (t == "set_cookie") {
    json args{{"domain", param_str(step, "domain")},
              {"name", param_str(step, "name")},
              {"value", param_str(step, "value")}};
    return transact(catalog, state, rec,
                    [&](Run& run) { run.edit(EditOp::append_cookie, std::move(args)); });
  }
  if (t == "set_setting") {
    json args{{"app", param_str(step, "app")},
              {"key", param_str(step, "key")},
              {"value", step.parameters.at("value")}};
    return transact(catalog, state, rec,
                    [&](Run& run) { run.edit(EditOp::set_setting, std::move(args)); });
  }
  throw UnknownStep("unknown config step type '" + t + "'");
}

std::vector<EffectRecord> apply_config(const AppCatalog& catalog, const FixtureStore& fixtures,
                                       DeviceState& state,
                                       const std::vector<taskspec::ConfigStep>& steps) {
  DeviceState work = state;
  std::vector<EffectRecord> out;
  for (const auto& step : steps) out.push_back(apply_config_step(catalog, fixtures, work, step));
  state = std::move(work);
  return out;
}

taskspec::StepRegistry default_step_registry() {
  using taskspec::FieldRule;
  using taskspec::ValueType;
  taskspec::StepRegistry r;
  r.steps["launch"] = {{"command", FieldRule{ValueType::string}}};
  r.steps["execute"] = {{"command", FieldRule{ValueType::string_or_list}}};
  r.steps["download"] = {{"fixture", FieldRule{ValueType::string}},
                         {"path", FieldRule{ValueType::string}}};
  r.steps["open_file"] = {{"path", FieldRule{ValueType::string}},
                          {"app", FieldRule{ValueType::string}}};
  r.steps["set_cookie"] = {{"domain", FieldRule{ValueType::string}},
                           {"name", FieldRule{ValueType::string}},
                           {"value", FieldRule{ValueType::string}}};
  r.steps["set_setting"] = {{"app", FieldRule{ValueType::string}},
                            {"key", FieldRule{ValueType::string}},
                            {"value", FieldRule{ValueType::scalar}}};
  return r;
}

}  // namespace arena::envsim
