#include "arena/taskspec.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace arena::taskspec {

namespace {

constexpr std::array<std::pair<Domain, std::string_view>, 6> kDomainNames = {{
    {Domain::office, "Office"},
    {Domain::web_browsing, "Web Browsing"},
    {Domain::windows_system, "Windows System"},
    {Domain::coding, "Coding"},
    {Domain::media_video, "Media & Video"},
    {Domain::windows_utilities, "Windows Utilities"},
}};

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

std::string join_path(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

std::string require_string(const json& obj, const std::string& key,
                           const std::string& path, bool non_empty = false) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw SchemaError(join_path(path, key), "expected string");
  auto s = v.get<std::string>();
  if (non_empty && s.empty()) throw SchemaError(join_path(path, key), "must not be empty");
  return s;
}

void reject_unknown(const json& obj, std::initializer_list<std::string_view> allowed,
                    const std::string& path) {
  for (const auto& [k, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw SchemaError(join_path(path, k), "unexpected key");
    }
  }
}

bool is_scalar(const json& v) { return v.is_string() || v.is_number() || v.is_boolean(); }

ConfigStep step_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected object");
  reject_unknown(j, {"type", "parameters"}, path);
  ConfigStep step;
  step.type = require_string(j, "type", path, true);
  if (auto it = j.find("parameters"); it != j.end()) {
    if (!it->is_object()) throw SchemaError(path + ".parameters", "expected object");
    for (const auto& [k, v] : it->items()) {
      bool ok = is_scalar(v);
      if (v.is_array()) {
        ok = std::all_of(v.begin(), v.end(), [](const json& e) { return is_scalar(e); });
      }
      if (!ok) {
        throw SchemaError(path + ".parameters." + k, "expected scalar or list of scalars");
      }
    }
    step.parameters = *it;
  }
  return step;
}

}  // namespace

std::string_view domain_name(Domain d) {
  for (const auto& [dom, name] : kDomainNames) {
    if (dom == d) return name;
  }
  return "Unknown";
}

std::optional<Domain> parse_domain(std::string_view name) {
  for (const auto& [dom, n] : kDomainNames) {
    if (n == name) return dom;
  }
  return std::nullopt;
}

std::optional<Domain> domain_for_app(std::string_view app) {
  static const std::map<std::string, Domain, std::less<>> table = {
      {"vlc", Domain::media_video},
      {"msedge", Domain::web_browsing},
      {"edge", Domain::web_browsing},
      {"chrome", Domain::web_browsing},
      {"notepad", Domain::windows_utilities},
      {"clock", Domain::windows_utilities},
      {"paint", Domain::windows_utilities},
      {"calculator", Domain::windows_utilities},
      {"settings", Domain::windows_system},
      {"file_explorer", Domain::windows_system},
      {"explorer", Domain::windows_system},
      {"vscode", Domain::coding},
      {"code", Domain::coding},
      {"writer", Domain::office},
      {"calc", Domain::office},
      {"libreoffice", Domain::office},
  };
  auto it = table.find(to_lower(app));
  if (it == table.end()) return std::nullopt;
  return it->second;
}

TaskSpec task_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("$", "task must be a JSON object");
  TaskSpec spec;
  spec.id = require_string(j, "id", "", true);
  spec.instruction = require_string(j, "instruction", "", true);

  const json& config = require(j, "config", "");
  if (!config.is_array()) throw SchemaError("config", "expected array");
  for (std::size_t i = 0; i < config.size(); ++i) {
    spec.config.push_back(step_from_json(config[i], "config[" + std::to_string(i) + "]"));
  }

  const json& ev = require(j, "evaluator", "");
  if (!ev.is_object()) throw SchemaError("evaluator", "expected object");
  reject_unknown(ev, {"func", "expected"}, "evaluator");
  spec.evaluator.func = require_string(ev, "func", "evaluator", true);
  const json& ex = require(ev, "expected", "evaluator");
  if (!ex.is_object()) throw SchemaError("evaluator.expected", "expected object");
  reject_unknown(ex, {"type", "rules", "golden"}, "evaluator.expected");
  spec.evaluator.expected.type = require_string(ex, "type", "evaluator.expected", true);
  if (auto it = ex.find("rules"); it != ex.end()) {
    if (!it->is_object()) throw SchemaError("evaluator.expected.rules", "expected object");
    spec.evaluator.expected.rules = *it;
  }
  if (ex.contains("golden")) {
    spec.evaluator.expected.golden = require_string(ex, "golden", "evaluator.expected", true);
  }

  if (auto it = j.find("result"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw SchemaError("result", "expected object");
    reject_unknown(*it, {"type", "dest"}, "result");
    ResultSpec r;
    r.type = require_string(*it, "type", "result", true);
    r.dest = it->contains("dest") ? require_string(*it, "dest", "result") : "";
    spec.result = r;
  }

  if (auto it = j.find("domain"); it != j.end()) {
    if (!it->is_string()) throw SchemaError("domain", "expected string");
    spec.domain = parse_domain(it->get<std::string>());
    if (!spec.domain) throw SchemaError("domain", "unknown category '" + it->get<std::string>() + "'");
  } else {
    // Infer from the first step that names an app.
    for (const auto& step : spec.config) {
      std::string app;
      if (step.type == "launch" && step.parameters.contains("command") &&
          step.parameters["command"].is_string()) {
        app = step.parameters["command"].get<std::string>();
      } else if (step.type == "open_file" && step.parameters.contains("app") &&
                 step.parameters["app"].is_string()) {
        app = step.parameters["app"].get<std::string>();
      }
      if (!app.empty()) {
        spec.domain = domain_for_app(app);
        break;
      }
    }
  }

  if (auto it = j.find("feasible"); it != j.end()) {
    if (!it->is_boolean()) throw SchemaError("feasible", "expected boolean");
    spec.feasible = it->get<bool>();
  }

  static const std::set<std::string> known = {"id",     "instruction", "config", "evaluator",
                                              "result", "domain",      "feasible"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) spec.extensions[k] = v;
  }
  return spec;
}

TaskSpec parse_task(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("malformed JSON: ") + e.what());
  }
  return task_from_json(j);
}

json task_to_json(const TaskSpec& spec) {
  json j = json::object();
  j["id"] = spec.id;
  j["instruction"] = spec.instruction;
  j["config"] = json::array();
  for (const auto& step : spec.config) {
    j["config"].push_back({{"type", step.type}, {"parameters", step.parameters}});
  }
  json expected = {{"type", spec.evaluator.expected.type}};
  if (!spec.evaluator.expected.rules.empty()) expected["rules"] = spec.evaluator.expected.rules;
  if (!spec.evaluator.expected.golden.empty()) expected["golden"] = spec.evaluator.expected.golden;
  j["evaluator"] = {{"func", spec.evaluator.func}, {"expected", expected}};
  if (spec.result) j["result"] = {{"type", spec.result->type}, {"dest", spec.result->dest}};
  if (spec.domain) j["domain"] = std::string(domain_name(*spec.domain));
  j["feasible"] = spec.feasible;
  for (const auto& [k, v] : spec.extensions.items()) j[k] = v;
  return j;
}

std::string serialize(const TaskSpec& spec) {
  const json plain = task_to_json(spec);
  ordered_json out = ordered_json::object();
  for (const char* key : {"id", "instruction", "config", "evaluator", "result", "domain", "feasible"}) {
    if (plain.contains(key)) out[key] = ordered_json(plain[key]);
  }
  // json objects iterate in sorted key order, so extensions land sorted.
  for (const auto& [k, v] : spec.extensions.items()) out[k] = ordered_json(v);
  return out.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

std::string_view value_type_name(ValueType t) {
  switch (t) {
    case ValueType::string: return "string";
    case ValueType::number: return "number";
    case ValueType::boolean: return "boolean";
    case ValueType::scalar: return "scalar";
    case ValueType::string_list: return "list of strings";
    case ValueType::string_or_list: return "string or list of strings";
    case ValueType::object: return "object";
    case ValueType::any: return "any";
  }
  return "?";
}

bool value_matches(const json& value, ValueType t) {
  switch (t) {
    case ValueType::string: return value.is_string();
    case ValueType::number: return value.is_number();
    case ValueType::boolean: return value.is_boolean();
    case ValueType::scalar: return is_scalar(value);
    case ValueType::string_list:
      return value.is_array() && !value.empty() &&
             std::all_of(value.begin(), value.end(), [](const json& e) { return e.is_string(); });
    case ValueType::string_or_list:
      return value.is_string() || value_matches(value, ValueType::string_list);
    case ValueType::object: return value.is_object();
    case ValueType::any: return true;
  }
  return false;
}

void check_fields(const json& object, const FieldSchema& schema,
                  const std::string& prefix, std::vector<Finding>& out) {
  for (const auto& [name, rule] : schema) {
    if (rule.required && !object.contains(name)) {
      out.push_back({prefix + "." + name, "missing required field"});
    }
  }
  for (const auto& [name, value] : object.items()) {
    auto it = schema.find(name);
    if (it == schema.end()) {
      out.push_back({prefix + "." + name, "unexpected field"});
    } else if (!value_matches(value, it->second.type)) {
      out.push_back({prefix + "." + name,
                     "expected " + std::string(value_type_name(it->second.type))});
    }
  }
}

ValidationReport validate(const TaskSpec& spec, const StepRegistry& steps,
                          const EvaluatorRegistry& evaluators,
                          const GetterRegistry& getters) {
  ValidationReport report;
  auto& f = report.findings;

  if (!spec.domain) f.push_back({"domain", "no category given and none could be inferred"});

  for (std::size_t i = 0; i < spec.config.size(); ++i) {
    const auto& step = spec.config[i];
    const std::string path = "config[" + std::to_string(i) + "]";
    auto it = steps.steps.find(step.type);
    if (it == steps.steps.end()) {
      f.push_back({path + ".type", "unknown config step type '" + step.type + "'"});
      continue;
    }
    check_fields(step.parameters, it->second, path + ".parameters", f);
  }

  const EvaluatorContract* contract = nullptr;
  if (auto it = evaluators.contracts.find(spec.evaluator.func); it != evaluators.contracts.end()) {
    contract = &it->second;
  } else {
    f.push_back({"evaluator.func", "unknown evaluator '" + spec.evaluator.func + "'"});
  }

  if (contract) {
    const auto& ex = spec.evaluator.expected;
    if (!contract->expected_types.count(ex.type)) {
      f.push_back({"evaluator.expected.type",
                   "evaluator '" + contract->name + "' does not accept expected type '" + ex.type + "'"});
    }
    check_fields(ex.rules, contract->rule_schema, "evaluator.expected.rules", f);
    if (contract->needs_golden && ex.golden.empty()) {
      f.push_back({"evaluator.expected.golden", "golden artifact reference required"});
    }
    if (!contract->needs_golden && !ex.golden.empty()) {
      f.push_back({"evaluator.expected.golden", "evaluator takes no golden artifact"});
    }
  }

  if (spec.result) {
    if (!getters.contains(spec.result->type)) {
      f.push_back({"result.type", "unknown getter type '" + spec.result->type + "'"});
    } else if (contract && !contract->accepted_getters.count(spec.result->type)) {
      f.push_back({"result.type", "evaluator '" + contract->name + "' cannot consume getter '" +
                                      spec.result->type + "'"});
    }
  } else if (contract && !contract->accepted_getters.empty() && contract->default_getter.empty()) {
    f.push_back({"result", "evaluator '" + contract->name + "' needs a result getter"});
  }

  if (!spec.feasible && spec.evaluator.func != "infeasible") {
    f.push_back({"feasible", "infeasible tasks must use the 'infeasible' evaluator"});
  }
  if (spec.feasible && spec.evaluator.func == "infeasible") {
    f.push_back({"feasible", "the 'infeasible' evaluator requires feasible=false"});
  }
  return report;
}

// ---------------------------------------------------------------------------

const TaskSpec* TaskSuite::find(std::string_view id) const {
  for (const auto& t : tasks) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

std::vector<std::string> TaskSuite::ids() const {
  std::vector<std::string> out;
  out.reserve(tasks.size());
  for (const auto& t : tasks) out.push_back(t.id);
  return out;
}

TaskSuite make_suite(std::vector<TaskSpec> tasks, std::vector<std::string> files) {
  TaskSuite suite;
  std::set<std::string> seen;
  for (const auto& t : tasks) {
    if (!seen.insert(t.id).second) throw DuplicateId("duplicate task id '" + t.id + "'");
    std::string cat = t.domain ? std::string(domain_name(*t.domain)) : "Uncategorized";
    ++suite.categories[cat];
  }
  suite.tasks = std::move(tasks);
  suite.files = std::move(files);
  return suite;
}

SuiteLoadError::SuiteLoadError(std::vector<std::pair<std::string, std::string>> failures)
    : Error("SuiteLoadError",
            [&] {
              std::string msg = std::to_string(failures.size()) + " task file(s) failed to load";
              for (const auto& [file, why] : failures) msg += "\n  " + file + ": " + why;
              return msg;
            }()),
      failures_(std::move(failures)) {}

std::string render_suite_index(const TaskSuite& suite) {
  std::string out;
  for (const auto& [cat, n] : suite.categories) out += cat + "=" + std::to_string(n) + "\n";
  return out;
}

std::map<std::string, std::size_t> parse_suite_index(std::string_view text) {
  std::map<std::string, std::size_t> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.rfind('=');
    if (eq == std::string::npos) throw SchemaError("suite.txt", "expected name=count, got '" + line + "'");
    out[trim(line.substr(0, eq))] = std::stoul(line.substr(eq + 1));
  }
  return out;
}

TaskSuite load_suite(const std::filesystem::path& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw SuiteLoadError({{directory.string(), "not a directory"}});
  }
  std::vector<std::string> rel_paths;
  for (const auto& entry : fs::recursive_directory_iterator(directory)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      rel_paths.push_back(fs::relative(entry.path(), directory).generic_string());
    }
  }
  std::sort(rel_paths.begin(), rel_paths.end());

  std::vector<std::pair<std::string, std::string>> failures;
  std::vector<TaskSpec> tasks;
  std::vector<std::string> files;
  std::map<std::string, std::string> owner;
  for (const auto& rel : rel_paths) {
    std::ifstream in(directory / rel, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      TaskSpec spec = parse_task(buf.str());
      if (auto it = owner.find(spec.id); it != owner.end()) {
        throw DuplicateId("duplicate task id '" + spec.id + "' (also in " + it->second + ")");
      }
      owner[spec.id] = rel;
      tasks.push_back(std::move(spec));
      files.push_back(rel);
    } catch (const DuplicateId&) {
      throw;
    } catch (const Error& e) {
      failures.emplace_back(rel, e.what());
    }
  }
  if (!failures.empty()) throw SuiteLoadError(std::move(failures));

  TaskSuite suite = make_suite(std::move(tasks), std::move(files));
  if (fs::exists(directory / "suite.txt")) {
    std::ifstream in(directory / "suite.txt");
    std::stringstream buf;
    buf << in.rdbuf();
    auto expected = parse_suite_index(buf.str());
    if (expected != suite.categories) {
      throw SuiteLoadError(std::vector<std::pair<std::string, std::string>>{
          {"suite.txt", "category counts do not match the task files"}});
    }
  }
  return suite;
}

}  // namespace arena::taskspec
