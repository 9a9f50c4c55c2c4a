#pragma once

// The `computer.*` action API: a restricted DSL parser producing validated
// programs, and an executor that drives the simulator.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/callexpr.hpp"
#include "arena/common.hpp"
#include "arena/envsim.hpp"
#include "arena/observe.hpp"

namespace arena::actions {

ARENA_DEFINE_ERROR(UnknownFunction);
ARENA_DEFINE_ERROR(ArityError);
ARENA_DEFINE_ERROR(TypeError);
ARENA_DEFINE_ERROR(UnknownElementId);
using envsim::NoFocusedInput;
using envsim::NoSuchProgram;
using envsim::NoSuchWindowTitle;

/// Grammar violation in an action program. `line` is 1-based.
class DslSyntaxError : public Error {
 public:
  DslSyntaxError(std::size_t line, std::size_t column, const std::string& message)
      : Error("DslSyntaxError", "line " + std::to_string(line) + ": " + message),
        line_(line),
        column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_, column_;
};

enum class Group { mouse, keyboard, clipboard, os, window_manager };
std::string_view group_name(Group g);

enum class ArgType { string, number, integer, direction };

struct Param {
  std::string name;
  ArgType type = ArgType::string;
  bool required = true;
  std::vector<std::string> aliases;
};

struct FunctionSpec {
  Group group;
  std::string name;
  std::vector<Param> params;
  std::string summary;
};

const std::vector<FunctionSpec>& action_table();
const FunctionSpec* find_function(std::string_view group, std::string_view name);

struct ComputerCall {
  Group group = Group::mouse;
  std::string name;
  std::vector<callexpr::Literal> args;
  std::vector<std::pair<std::string, callexpr::Literal>> kwargs;
  std::size_t line = 0;
  /// Arguments bound to canonical parameter names.
  json bound = json::object();

  std::string qualified() const;  // "computer.mouse.move_id"
  /// Canonical source text: bound arguments as keywords in parameter order.
  std::string to_source() const;
  bool operator==(const ComputerCall&) const = default;
};

struct ActionProgram {
  std::vector<ComputerCall> calls;
  std::string source_text;
};

/// Accepts blank lines, comment lines and `computer.<group>.<fn>(literals)`
/// statements, one per line.
ActionProgram parse_program(std::string_view code);

/// Validates a single parsed statement against the action table.
ComputerCall bind_call(const callexpr::CallExpr& expr, std::size_t line);

struct CursorState {
  double x = 0.5, y = 0.5;
  std::optional<std::size_t> last_target;
  bool operator==(const CursorState&) const = default;
};

struct LogEntry {
  std::string call;    // canonical source
  std::string target;  // resolved target description
  std::optional<envsim::EffectRecord> record;
  std::string error_kind;
  std::string error_message;

  bool ok() const { return error_kind.empty(); }
  bool operator==(const LogEntry&) const = default;
};

void to_json(json& j, const LogEntry& e);
void from_json(const json& j, LogEntry& e);

struct EffectLog {
  std::vector<LogEntry> entries;
  bool failed() const { return !entries.empty() && !entries.back().ok(); }
  std::string to_jsonl() const;
  static EffectLog from_jsonl(std::string_view text);
};

/// Executes one call. Throws arena::Error subclasses; state and cursor are
/// left untouched on error.
LogEntry execute_call(const envsim::AppCatalog& catalog, envsim::DeviceState& state,
                      CursorState& cursor, const ComputerCall& call,
                      const observe::AnnotatedScreen& screen);

/// Executes calls in order, stopping at the first error, which is logged.
EffectLog execute_program(const envsim::AppCatalog& catalog, envsim::DeviceState& state,
                          CursorState& cursor, const ActionProgram& program,
                          const observe::AnnotatedScreen& screen);

}  // namespace arena::actions
