#include "arena/actions.hpp"

#include <sstream>

namespace arena::actions {

std::string_view group_name(Group g) {
  switch (g) {
    case Group::mouse: return "mouse";
    case Group::keyboard: return "keyboard";
    case Group::clipboard: return "clipboard";
    case Group::os: return "os";
    case Group::window_manager: return "window_manager";
  }
  return "";
}

const std::vector<FunctionSpec>& action_table() {
  static const std::vector<FunctionSpec> table = {
      {Group::mouse, "move_id", {{"id", ArgType::integer}}, "move the cursor to the center of a marked element"},
      {Group::mouse, "move_abs", {{"x", ArgType::number}, {"y", ArgType::number}}, "move the cursor to a normalized point"},
      {Group::mouse, "single_click", {}, "left click at the cursor"},
      {Group::mouse, "double_click", {}, "double click at the cursor"},
      {Group::mouse, "right_click", {}, "right click at the cursor"},
      {Group::mouse, "scroll", {{"dir", ArgType::direction, true, {"direction"}}}, "scroll the foreground window up or down"},
      {Group::keyboard, "write", {{"text", ArgType::string}}, "type text into the focused input"},
      {Group::keyboard, "press", {{"key", ArgType::string}}, "press a key or '+'-joined chord"},
      {Group::clipboard, "copy_text", {{"text", ArgType::string}}, "put text on the clipboard"},
      {Group::clipboard, "copy_image", {{"id", ArgType::integer, true, {"image"}}, {"description", ArgType::string, false}},
       "copy a marked image element"},
      {Group::clipboard, "paste", {}, "paste clipboard contents"},
      {Group::os, "open_program", {{"program", ArgType::string}}, "launch a program by handle"},
      {Group::window_manager, "switch_to_application", {{"window", ArgType::string}}, "bring a window to the front by exact title"},
  };
  return table;
}

const FunctionSpec* find_function(std::string_view group, std::string_view name) {
  for (const auto& f : action_table()) {
    if (group_name(f.group) == group && f.name == name) return &f;
  }
  return nullptr;
}

std::string ComputerCall::qualified() const {
  return "computer." + std::string(group_name(group)) + "." + name;
}

std::string ComputerCall::to_source() const {
  const FunctionSpec* f = find_function(group_name(group), name);
  std::string out = qualified() + "(";
  bool first = true;
  for (const auto& p : f->params) {
    if (!bound.contains(p.name)) continue;
    if (!first) out += ", ";
    first = false;
    out += p.name + "=" + callexpr::render_literal(callexpr::literal_from_json(bound.at(p.name)));
  }
  return out + ")";
}

namespace {

void check_type(const Param& p, const callexpr::Literal& v, const std::string& fn) {
  auto bad = [&](const std::string& want) {
    throw TypeError(fn + ": argument '" + p.name + "' must be " + want + ", got " +
                    callexpr::literal_type_name(v));
  };
  switch (p.type) {
    case ArgType::string:
      if (!std::holds_alternative<std::string>(v)) bad("a string");
      break;
    case ArgType::number:
      if (!callexpr::as_number(v)) bad("a number");
      break;
    case ArgType::integer:
      if (!std::holds_alternative<std::int64_t>(v)) bad("an integer");
      if (std::get<std::int64_t>(v) < 0) throw TypeError(fn + ": '" + p.name + "' must be non-negative");
      break;
    case ArgType::direction: {
      const auto* s = std::get_if<std::string>(&v);
      if (!s) bad("\"up\" or \"down\"");
      if (*s != "up" && *s != "down") {
        throw TypeError(fn + ": '" + p.name + "' must be \"up\" or \"down\", got \"" + *s + "\"");
      }
      break;
    }
  }
}

}  // namespace

ComputerCall bind_call(const callexpr::CallExpr& expr, std::size_t line) {
  const std::string dotted = expr.dotted();
  if (expr.path.size() != 3 || expr.path[0] != "computer") {
    throw UnknownFunction("line " + std::to_string(line) + ": '" + dotted +
                          "' is not a computer.<group>.<function> call");
  }
  const FunctionSpec* f = find_function(expr.path[1], expr.path[2]);
  if (!f) throw UnknownFunction("line " + std::to_string(line) + ": unknown function '" + dotted + "'");

  ComputerCall call;
  call.group = f->group;
  call.name = f->name;
  call.args = expr.args;
  call.kwargs = expr.kwargs;
  call.line = line;
  const std::string where = "line " + std::to_string(line) + ": " + dotted;

  if (expr.args.size() > f->params.size()) {
    throw ArityError(where + " takes at most " + std::to_string(f->params.size()) + " argument(s), got " +
                     std::to_string(expr.args.size()));
  }
  for (std::size_t i = 0; i < expr.args.size(); ++i) {
    check_type(f->params[i], expr.args[i], where);
    call.bound[f->params[i].name] = callexpr::literal_to_json(expr.args[i]);
  }
  for (const auto& [kw, value] : expr.kwargs) {
    const Param* p = nullptr;
    for (const auto& cand : f->params) {
      if (cand.name == kw || std::find(cand.aliases.begin(), cand.aliases.end(), kw) != cand.aliases.end()) {
        p = &cand;
      }
    }
    if (!p) throw ArityError(where + " got an unexpected keyword argument '" + kw + "'");
    if (call.bound.contains(p->name)) throw ArityError(where + " got multiple values for '" + p->name + "'");
    check_type(*p, value, where);
    call.bound[p->name] = callexpr::literal_to_json(value);
  }
  for (const auto& p : f->params) {
    if (p.required && !call.bound.contains(p.name)) {
      throw ArityError(where + " missing required argument '" + p.name + "'");
    }
  }
  return call;
}

ActionProgram parse_program(std::string_view code) {
  ActionProgram prog;
  prog.source_text = std::string(code);
  std::istringstream in(prog.source_text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    callexpr::CallExpr expr;
    try {
      expr = callexpr::parse_statement(text);
    } catch (const callexpr::SyntaxError& e) {
      throw DslSyntaxError(line, e.column() + 1, e.what());
    }
    prog.calls.push_back(bind_call(expr, line));
  }
  return prog;
}

void to_json(json& j, const LogEntry& e) {
  j = json{{"call", e.call}, {"target", e.target}};
  j["record"] = e.record ? json(*e.record) : json(nullptr);
  if (!e.ok()) j["error"] = {{"kind", e.error_kind}, {"message", e.error_message}};
}

void from_json(const json& j, LogEntry& e) {
  e = LogEntry{};
  e.call = j.at("call").get<std::string>();
  e.target = j.value("target", "");
  if (j.contains("record") && !j.at("record").is_null()) e.record = j.at("record").get<envsim::EffectRecord>();
  if (j.contains("error")) {
    e.error_kind = j.at("error").at("kind").get<std::string>();
    e.error_message = j.at("error").at("message").get<std::string>();
  }
}

std::string EffectLog::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) out += json(e).dump() + "\n";
  return out;
}

EffectLog EffectLog::from_jsonl(std::string_view text) {
  EffectLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) log.entries.push_back(json::parse(line).get<LogEntry>());
  }
  return log;
}

// ---------------------------------------------------------------------------

LogEntry execute_call(const envsim::AppCatalog& catalog, envsim::DeviceState& state,
                      CursorState& cursor, const ComputerCall& call,
                      const observe::AnnotatedScreen& screen) {
  LogEntry entry;
  entry.call = call.to_source();
  const json& a = call.bound;
  auto element = [&](const char* param) -> const observe::ScreenElement& {
    auto id = a.at(param).get<std::size_t>();
    const auto* e = screen.find(id);
    if (!e) {
      throw UnknownElementId("element id " + std::to_string(id) + " is not on the current screen (" +
                             std::to_string(screen.elements.size()) + " elements)");
    }
    return *e;
  };
  auto point = [](double x, double y) { return "(" + format_trimmed(x, 4) + ", " + format_trimmed(y, 4) + ")"; };
  auto click = [&](envsim::EventKind ev) {
    entry.target = point(cursor.x, cursor.y);
    entry.record = envsim::pointer_event(catalog, state, cursor.x, cursor.y, ev);
  };

  const std::string& n = call.name;
  if (n == "move_id") {
    const auto& e = element("id");
    cursor = {e.bbox.cx(), e.bbox.cy(), a.at("id").get<std::size_t>()};
    entry.target = "element " + std::to_string(*cursor.last_target) + " " + point(cursor.x, cursor.y);
  } else if (n == "move_abs") {
    double x = a.at("x").get<double>(), y = a.at("y").get<double>();
    if (!(x >= 0.0 && x <= 1.0 && y >= 0.0 && y <= 1.0)) {
      throw envsim::OutOfRange("move_abs target " + point(x, y) + " is outside the screen");
    }
    cursor = {x, y, std::nullopt};
    entry.target = point(x, y);
  } else if (n == "single_click") {
    click(envsim::EventKind::click);
  } else if (n == "double_click") {
    click(envsim::EventKind::double_click);
  } else if (n == "right_click") {
    click(envsim::EventKind::right_click);
  } else if (n == "scroll") {
    entry.target = state.foreground_id();
    entry.record = envsim::scroll(state, a.at("dir").get<std::string>());
  } else if (n == "write") {
    entry.record = envsim::type_text(catalog, state, a.at("text").get<std::string>());
    entry.target = entry.record->window + (entry.record->node.empty() ? "" : "/" + entry.record->node);
  } else if (n == "press") {
    entry.record = envsim::press_key(catalog, state, a.at("key").get<std::string>());
    entry.target = entry.record->window + (entry.record->node.empty() ? "" : "/" + entry.record->node);
  } else if (n == "copy_text") {
    entry.target = "clipboard";
    entry.record = envsim::set_clipboard(state, {envsim::ClipboardKind::text, a.at("text").get<std::string>()});
  } else if (n == "copy_image") {
    const auto& e = element("id");
    std::string desc = e.content;
    if (desc.empty()) desc = a.value("description", "");
    entry.target = "element " + std::to_string(a.at("id").get<std::size_t>());
    entry.record = envsim::set_clipboard(state, {envsim::ClipboardKind::image, desc});
  } else if (n == "paste") {
    entry.target = "clipboard";
    entry.record = envsim::paste(catalog, state);
  } else if (n == "open_program") {
    entry.record = envsim::open_program(catalog, state, a.at("program").get<std::string>());
    entry.target = entry.record->window;
  } else if (n == "switch_to_application") {
    entry.record = envsim::switch_to_window(state, a.at("window").get<std::string>());
    entry.target = entry.record->window;
  } else {
    throw UnknownFunction("no executor for '" + call.qualified() + "'");
  }
  return entry;
}

EffectLog execute_program(const envsim::AppCatalog& catalog, envsim::DeviceState& state,
                          CursorState& cursor, const ActionProgram& program,
                          const observe::AnnotatedScreen& screen) {
  EffectLog log;
  for (const auto& call : program.calls) {
    try {
      log.entries.push_back(execute_call(catalog, state, cursor, call, screen));
    } catch (const Error& e) {
      LogEntry failed;
      failed.call = call.to_source();
      failed.error_kind = e.kind();
      failed.error_message = e.what();
      log.entries.push_back(std::move(failed));
      break;
    }
  }
  return log;
}

}  // namespace arena::actions
