#pragma once

// Task definitions: parsing, canonical serialization, registry-driven
// validation and directory loading. Everything here is a pure function of its
// inputs.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "arena/common.hpp"

namespace arena::taskspec {

ARENA_DEFINE_ERROR(SyntaxError);
ARENA_DEFINE_ERROR(DuplicateId);

/// Missing or mistyped key. `key_path()` names the offending key, e.g.
/// "evaluator.expected.rules".
class SchemaError : public Error {
 public:
  SchemaError(std::string key_path, const std::string& message)
      : Error("SchemaError", key_path + ": " + message),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const { return key_path_; }

 private:
  std::string key_path_;
};

enum class Domain {
  office,
  web_browsing,
  windows_system,
  coding,
  media_video,
  windows_utilities,
};

inline constexpr std::array<Domain, 6> kAllDomains = {
    Domain::office,       Domain::web_browsing, Domain::windows_system,
    Domain::coding,       Domain::media_video,  Domain::windows_utilities};

/// Display names: "Office", "Web Browsing", "Windows System", "Coding",
/// "Media & Video", "Windows Utilities".
std::string_view domain_name(Domain d);
std::optional<Domain> parse_domain(std::string_view name);
/// Best-effort category for an app handle ("vlc" -> Media & Video).
std::optional<Domain> domain_for_app(std::string_view app);

struct ConfigStep {
  std::string type;
  json parameters = json::object();
  bool operator==(const ConfigStep&) const = default;
};

struct ExpectedSpec {
  std::string type;              // "rule" | "golden_file" | "infeasible"
  json rules = json::object();   // rule payload, may be empty
  std::string golden;            // golden artifact name for golden_file
  bool operator==(const ExpectedSpec&) const = default;
};

struct EvaluatorSpec {
  std::string func;
  ExpectedSpec expected;
  bool operator==(const EvaluatorSpec&) const = default;
};

struct ResultSpec {
  std::string type;
  std::string dest;
  bool operator==(const ResultSpec&) const = default;
};

struct TaskSpec {
  std::string id;
  std::string instruction;
  std::vector<ConfigStep> config;
  EvaluatorSpec evaluator;
  std::optional<ResultSpec> result;
  std::optional<Domain> domain;
  bool feasible = true;
  /// Unknown top-level keys, kept verbatim.
  json extensions = json::object();

  bool operator==(const TaskSpec&) const = default;
};

TaskSpec parse_task(std::string_view json_text);
TaskSpec task_from_json(const json& j);
/// Canonical text: top-level keys in schema order (id, instruction, config,
/// evaluator, result, domain, feasible, then extensions sorted), nested keys
/// sorted, two-space indent, LF line ends, trailing newline.
std::string serialize(const TaskSpec& spec);
json task_to_json(const TaskSpec& spec);

// ---------------------------------------------------------------------------
// Registries and validation

enum class ValueType {
  string,
  number,
  boolean,
  scalar,            // string | number | boolean
  string_list,
  string_or_list,    // string | list of strings
  object,
  any,
};

std::string_view value_type_name(ValueType t);
bool value_matches(const json& value, ValueType t);

struct FieldRule {
  ValueType type = ValueType::any;
  bool required = true;
};
using FieldSchema = std::map<std::string, FieldRule>;

struct StepRegistry {
  std::map<std::string, FieldSchema> steps;
  bool contains(const std::string& type) const { return steps.count(type) != 0; }
};

struct EvaluatorContract {
  std::string name;
  std::set<std::string> expected_types;
  FieldSchema rule_schema;
  bool needs_golden = false;
  /// Result getter types this evaluator can consume. Empty means the
  /// evaluator takes no fetched state.
  std::set<std::string> accepted_getters;
  /// Getter used when the task omits "result"; empty means "result" is
  /// required whenever accepted_getters is non-empty.
  std::string default_getter;
  std::string default_dest;
  bool continuous = false;
  std::string summary;
};

struct EvaluatorRegistry {
  std::map<std::string, EvaluatorContract> contracts;
  bool contains(const std::string& func) const { return contracts.count(func) != 0; }
};

struct GetterRegistry {
  std::set<std::string> types;
  bool contains(const std::string& type) const { return types.count(type) != 0; }
};

struct Finding {
  std::string key_path;
  std::string message;
  bool operator==(const Finding&) const = default;
};

struct ValidationReport {
  std::vector<Finding> findings;
  bool ok() const { return findings.empty(); }
};

ValidationReport validate(const TaskSpec& spec, const StepRegistry& steps,
                          const EvaluatorRegistry& evaluators,
                          const GetterRegistry& getters);

/// Field-by-field schema check shared by config parameters and rule
/// payloads. Appends findings under `prefix`.
void check_fields(const json& object, const FieldSchema& schema,
                  const std::string& prefix, std::vector<Finding>& out);

// ---------------------------------------------------------------------------
// Suites

struct TaskSuite {
  std::vector<TaskSpec> tasks;
  /// Source file per task (relative path), parallel to `tasks`. Empty for
  /// suites built in memory.
  std::vector<std::string> files;
  std::map<std::string, std::size_t> categories;  // domain name -> count

  const TaskSpec* find(std::string_view id) const;
  std::vector<std::string> ids() const;
};

/// Builds a suite from in-memory specs, enforcing id uniqueness.
TaskSuite make_suite(std::vector<TaskSpec> tasks,
                     std::vector<std::string> files = {});

/// Per-file failures collected while loading a directory.
class SuiteLoadError : public Error {
 public:
  explicit SuiteLoadError(std::vector<std::pair<std::string, std::string>> failures);
  const std::vector<std::pair<std::string, std::string>>& failures() const {
    return failures_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> failures_;
};

/// Loads every `*.json` under `directory` (recursively), ordered by relative
/// path. If a `suite.txt` index (lines of `Category=count`) is present, the
/// category counts must match it.
TaskSuite load_suite(const std::filesystem::path& directory);

std::string render_suite_index(const TaskSuite& suite);
std::map<std::string, std::size_t> parse_suite_index(std::string_view text);

}  // namespace arena::taskspec
