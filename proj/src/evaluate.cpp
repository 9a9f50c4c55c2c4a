#include "arena/evaluate.hpp"

#include <algorithm>
#include <vector>

namespace arena::evaluate {

void to_json(json& j, const Reward& r) {
  j = json{{"value", r.value},
           {"kind", r.kind == RewardKind::binary ? "binary" : "continuous"},
           {"detail", r.detail}};
}

void from_json(const json& j, Reward& r) {
  r.value = j.at("value").get<double>();
  r.kind = j.at("kind").get<std::string>() == "binary" ? RewardKind::binary : RewardKind::continuous;
  r.detail = j.value("detail", "");
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::DONE: return "DONE";
    case Termination::FAIL: return "FAIL";
    case Termination::WAIT_TIMEOUT: return "WAIT_TIMEOUT";
    case Termination::STEP_LIMIT: return "STEP_LIMIT";
  }
  return "";
}

Termination parse_termination(std::string_view s) {
  for (auto t : {Termination::DONE, Termination::FAIL, Termination::WAIT_TIMEOUT, Termination::STEP_LIMIT}) {
    if (termination_name(t) == s) return t;
  }
  throw FormatError("unknown termination '" + std::string(s) + "'");
}

bool reason_claims_infeasible(std::string_view reason) {
  return to_lower(reason).find("infeasible") != std::string::npos;
}

// ---------------------------------------------------------------------------

json fetch_state(const envsim::DeviceState& state, const GetterSpec& g) {
  if (g.type == "vlc_config") {
    auto it = state.settings.find("vlc");
    if (it == state.settings.end()) throw PathMissing("vlc settings are absent");
    return it->second;
  }
  if (g.type == "settings_json") {
    auto it = state.settings.find(g.dest);
    if (it == state.settings.end()) throw PathMissing("no settings for '" + g.dest + "'");
    return it->second;
  }
  if (g.type == "file" || g.type == "file_attrs") {
    auto it = state.files.find(g.dest);
    if (it == state.files.end()) throw PathMissing("no such file '" + g.dest + "'");
    const auto& f = it->second;
    if (g.type == "file_attrs") {
      return json{{"is_dir", f.is_dir}, {"hidden", f.hidden}, {"readonly", f.readonly}};
    }
    if (f.is_dir) throw PathMissing("'" + g.dest + "' is a directory");
    return f.content;
  }
  if (g.type == "cookies") {
    json out = json::array();
    for (const auto& c : state.cookies) out.push_back({{"domain", c.domain}, {"name", c.name}, {"value", c.value}});
    return out;
  }
  throw GetterMissing("unknown getter type '" + g.type + "'");
}

taskspec::GetterRegistry default_getter_registry() {
  return {{"vlc_config", "file", "settings_json", "cookies", "file_attrs"}};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::uint32_t> code_points(std::string_view s) {
  std::vector<std::uint32_t> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    auto c = static_cast<unsigned char>(s[i]);
    int len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xE ? 3 : (c >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + static_cast<std::size_t>(len) <= s.size();
    for (int k = 1; ok && k < len; ++k) ok = (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
    if (!ok) {
      // Tag invalid bytes above the Unicode range so they never equal a
      // decoded code point.
      out.push_back(0x110000u + c);
      ++i;
      continue;
    }
    std::uint32_t cp = len == 1 ? c : c & (0x7F >> len);
    for (int k = 1; k < len; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    out.push_back(cp);
    i += static_cast<std::size_t>(len);
  }
  return out;
}

}  // namespace

std::size_t levenshtein(std::string_view a_text, std::string_view b_text) {
  auto a = code_points(a_text), b = code_points(b_text);
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

Reward text_similarity(std::string_view candidate, std::string_view golden) {
  std::size_t n = std::max(code_points(candidate).size(), code_points(golden).size());
  if (n == 0) return Reward::continuous(1.0, "both texts empty");
  std::size_t d = levenshtein(candidate, golden);
  double v = 1.0 - static_cast<double>(d) / static_cast<double>(n);
  return Reward::continuous(v, "edit distance " + std::to_string(d) + " over " + std::to_string(n));
}

Reward is_cookie_deleted(const json& cookies, const json& rule) {
  const auto& domains = rule.at("domains");
  for (const auto& c : cookies) {
    const std::string domain = c.at("domain").get<std::string>();
    for (const auto& d : domains) {
      if (domain.find(d.get<std::string>()) != std::string::npos) {
        return Reward::binary(false, "cookie for '" + domain + "' still present");
      }
    }
  }
  return Reward::binary(true, "no matching cookies");
}

namespace {

const json* resolve_path(const json& doc, const std::string& path) {
  if (!doc.is_object()) return nullptr;
  if (auto it = doc.find(path); it != doc.end()) return &*it;
  const json* cur = &doc;
  std::size_t start = 0;
  while (true) {
    auto dot = path.find('.', start);
    std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!cur->is_object()) return nullptr;
    auto it = cur->find(part);
    if (it == cur->end()) return nullptr;
    cur = &*it;
    if (dot == std::string::npos) return cur;
    start = dot + 1;
  }
}

}  // namespace

Reward check_json_settings(const json& doc, const json& rule) {
  for (const auto& [path, want] : rule.at("expected").items()) {
    const json* got = resolve_path(doc, path);
    if (!got) return Reward::binary(false, "'" + path + "' is not set");
    if (*got != want) {
      return Reward::binary(false, "'" + path + "' is " + got->dump() + ", expected " + want.dump());
    }
  }
  return Reward::binary(true, "all expected settings match");
}

HighlightDoc parse_highlights(std::string_view text) {
  static constexpr std::string_view kOpen = "<hl>", kClose = "</hl>";
  HighlightDoc doc;
  bool open = false;
  for (std::size_t i = 0; i < text.size();) {
    if (text.substr(i, kOpen.size()) == kOpen) {
      if (open) throw FormatError("nested highlight at offset " + std::to_string(i));
      open = true;
      i += kOpen.size();
    } else if (text.substr(i, kClose.size()) == kClose) {
      if (!open) throw FormatError("unmatched </hl> at offset " + std::to_string(i));
      open = false;
      ++doc.spans;
      i += kClose.size();
    } else {
      doc.plain.push_back(text[i++]);
    }
  }
  if (open) throw FormatError("unterminated highlight");
  return doc;
}

Reward check_highlighted_words(std::string_view candidate, std::string_view golden) {
  HighlightDoc c = parse_highlights(candidate), g = parse_highlights(golden);
  if (c.spans) return Reward::binary(false, std::to_string(c.spans) + " highlight(s) remain");
  if (c.plain != g.plain) return Reward::binary(false, "text differs from golden");
  return Reward::binary(true, "no highlights, text matches");
}

Reward vis_vlc_recordings_folder(const json& vlc, const json& rules) {
  const std::string want = rules.at("recording_file_path").get<std::string>();
  auto it = vlc.find("recording_file_path");
  if (it == vlc.end() || !it->is_string()) return Reward::binary(false, "recording path not set");
  const std::string got = it->get<std::string>();
  return Reward::binary(got == want, "recording path is '" + got + "'");
}

Reward check_file_attributes(const json& attrs, const json& rules) {
  for (const auto& [k, want] : rules.items()) {
    if (!attrs.contains(k) || attrs.at(k) != want) {
      return Reward::binary(false, "attribute '" + k + "' is not " + want.dump());
    }
  }
  return Reward::binary(true, "attributes match");
}

Reward check_file_contains(std::string_view content, const json& rules) {
  const std::string needle = rules.at("substring").get<std::string>();
  bool ok = content.find(needle) != std::string_view::npos;
  return Reward::binary(ok, ok ? "substring found" : "substring missing");
}

Reward exact_match_file(std::string_view candidate, std::string_view golden) {
  return Reward::binary(candidate == golden, candidate == golden ? "identical" : "contents differ");
}

Reward compare_text_file(std::string_view candidate, std::string_view golden) {
  return text_similarity(candidate, golden);
}

// ---------------------------------------------------------------------------

const std::string* GoldenStore::find(const std::string& task, const std::string& name) const {
  auto t = artifacts.find(task);
  if (t == artifacts.end()) return nullptr;
  auto a = t->second.find(name);
  return a == t->second.end() ? nullptr : &a->second;
}

namespace {

using taskspec::FieldRule;
using taskspec::ValueType;

const json& state_of(const EvalInputs& in) {
  if (!in.fetched) throw FormatError("evaluator needs a fetched state fragment");
  return *in.fetched;
}

std::string as_text(const EvalInputs& in) {
  if (!in.fetched || !in.fetched->is_string()) throw FormatError("expected file text");
  return in.fetched->get<std::string>();
}

const std::string& golden_of(const EvalInputs& in) {
  if (!in.golden) throw FormatError("evaluator needs a golden artifact");
  return *in.golden;
}

std::map<std::string, Evaluator> build() {
  std::map<std::string, Evaluator> m;
  auto add = [&](taskspec::EvaluatorContract c, EvaluatorFn fn) {
    std::string name = c.name;
    m[name] = {std::move(c), std::move(fn)};
  };
  add({"vis_vlc_recordings_folder", {"rule"}, {{"recording_file_path", FieldRule{ValueType::string}}}, false,
       {"vlc_config"}, "", "", false, "VLC recording folder equals the expected path"},
      [](const EvalInputs& in) { return vis_vlc_recordings_folder(state_of(in), in.rules); });
  add({"is_cookie_deleted", {"rule"}, {{"domains", FieldRule{ValueType::string_list}}}, false,
       {"cookies"}, "cookies", "", false, "no stored cookie domain contains a listed domain"},
      [](const EvalInputs& in) { return is_cookie_deleted(state_of(in), in.rules); });
  add({"check_json_settings", {"rule"}, {{"expected", FieldRule{ValueType::object}}}, false,
       {"settings_json"}, "", "", false, "every expected key path holds exactly the expected value"},
      [](const EvalInputs& in) { return check_json_settings(state_of(in), in.rules); });
  add({"check_highlighted_words", {"golden_file"}, {}, true, {"file"}, "", "", false,
       "document has no highlight spans and its text equals the golden text"},
      [](const EvalInputs& in) { return check_highlighted_words(as_text(in), golden_of(in)); });
  add({"compare_text_file", {"golden_file"}, {}, true, {"file"}, "", "", true,
       "normalized edit-distance similarity to the golden text"},
      [](const EvalInputs& in) { return compare_text_file(as_text(in), golden_of(in)); });
  add({"exact_match_file", {"golden_file"}, {}, true, {"file"}, "", "", false,
       "file bytes equal the golden artifact"},
      [](const EvalInputs& in) { return exact_match_file(as_text(in), golden_of(in)); });
  add({"check_file_attributes", {"rule"},
       {{"hidden", FieldRule{ValueType::boolean, false}}, {"readonly", FieldRule{ValueType::boolean, false}},
        {"is_dir", FieldRule{ValueType::boolean, false}}},
       false, {"file_attrs"}, "", "", false, "listed file attributes hold the expected values"},
      [](const EvalInputs& in) { return check_file_attributes(state_of(in), in.rules); });
  add({"check_file_contains", {"rule"}, {{"substring", FieldRule{ValueType::string}}}, false, {"file"}, "", "",
       false, "file text contains the expected substring"},
      [](const EvalInputs& in) { return check_file_contains(as_text(in), in.rules); });
  add({"infeasible", {"infeasible"}, {}, false, {}, "", "", false,
       "credit only for FAIL with a reason containing \"infeasible\""},
      [](const EvalInputs&) { return Reward::binary(false, "infeasible tasks are scored from the outcome"); });
  return m;
}

}  // namespace

const std::map<std::string, Evaluator>& evaluators() {
  static const std::map<std::string, Evaluator> m = build();
  return m;
}

taskspec::EvaluatorRegistry default_evaluator_registry() {
  taskspec::EvaluatorRegistry r;
  for (const auto& [name, e] : evaluators()) r.contracts[name] = e.contract;
  return r;
}

std::string evaluator_manifest() {
  std::string out =
      "| Evaluator | Expected type | Rule fields | Getters | Golden | Reward | Contract |\n"
      "|---|---|---|---|---|---|---|\n";
  auto join = [](const auto& xs) {
    std::string s;
    for (const auto& x : xs) s += (s.empty() ? "" : ", ") + std::string(x);
    return s.empty() ? std::string("-") : s;
  };
  for (const auto& [name, e] : evaluators()) {
    const auto& c = e.contract;
    std::vector<std::string> fields;
    for (const auto& [f, rule] : c.rule_schema) {
      fields.push_back(f + ": " + std::string(taskspec::value_type_name(rule.type)) + (rule.required ? "" : "?"));
    }
    out += "| `" + name + "` | " + join(c.expected_types) + " | " + join(fields) + " | " +
           join(c.accepted_getters) + " | " + (c.needs_golden ? "yes" : "no") + " | " +
           (c.continuous ? "continuous" : "binary") + " | " + c.summary + " |\n";
  }
  return out;
}

Reward evaluate_task(const envsim::DeviceState& state, const taskspec::TaskSpec& spec,
                     const EpisodeOutcome& outcome, const GoldenStore& golden) {
  auto it = evaluators().find(spec.evaluator.func);
  if (it == evaluators().end()) throw EvaluatorMissing("no evaluator named '" + spec.evaluator.func + "'");
  const Evaluator& ev = it->second;

  if (!spec.feasible) {
    bool ok = outcome.termination == Termination::FAIL && outcome.fail_reason &&
              reason_claims_infeasible(*outcome.fail_reason);
    return Reward::binary(ok, ok ? "correctly reported as infeasible"
                                 : "infeasible task ended with " +
                                       std::string(termination_name(outcome.termination)));
  }

  const auto zero = [&](const std::string& why) {
    return ev.contract.continuous ? Reward::continuous(0.0, why) : Reward::binary(false, why);
  };

  const std::string* gold = nullptr;
  if (ev.contract.needs_golden) {
    gold = golden.find(spec.id, spec.evaluator.expected.golden);
    if (!gold) {
      throw GoldenMissing("no golden artifact '" + spec.evaluator.expected.golden + "' for task '" + spec.id + "'");
    }
  }

  std::optional<json> fetched;
  if (!ev.contract.accepted_getters.empty()) {
    GetterSpec g;
    if (spec.result) {
      g = {spec.result->type, spec.result->dest};
    } else {
      g = {ev.contract.default_getter, ev.contract.default_dest};
    }
    try {
      fetched = fetch_state(state, g);
    } catch (const PathMissing& e) {
      return zero(e.what());
    }
  }

  Reward r;
  try {
    r = ev.fn(EvalInputs{std::move(fetched), spec.evaluator.expected.rules, gold});
  } catch (const FormatError& e) {
    // A malformed artifact left by the agent is a task failure.
    return zero(std::string("unparseable result: ") + e.what());
  }
  r.value = std::clamp(r.value, 0.0, 1.0);
  return r;
}

}  // namespace arena::evaluate
