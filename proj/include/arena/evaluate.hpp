#pragma once

// Execution-based rewards: state getters, evaluator functions and the
// per-task dispatcher.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "arena/common.hpp"
#include "arena/envsim.hpp"
#include "arena/taskspec.hpp"

namespace arena::evaluate {

ARENA_DEFINE_ERROR(PathMissing);
ARENA_DEFINE_ERROR(FormatError);
ARENA_DEFINE_ERROR(EvaluatorMissing);
ARENA_DEFINE_ERROR(GetterMissing);
ARENA_DEFINE_ERROR(GoldenMissing);

enum class RewardKind { binary, continuous };

struct Reward {
  double value = 0.0;
  RewardKind kind = RewardKind::binary;
  std::string detail;

  static Reward binary(bool ok, std::string detail) {
    return {ok ? 1.0 : 0.0, RewardKind::binary, std::move(detail)};
  }
  static Reward continuous(double v, std::string detail) {
    return {v, RewardKind::continuous, std::move(detail)};
  }
  bool operator==(const Reward&) const = default;
};

void to_json(json& j, const Reward& r);
void from_json(const json& j, Reward& r);

enum class Termination { DONE, FAIL, WAIT_TIMEOUT, STEP_LIMIT };
std::string_view termination_name(Termination t);
Termination parse_termination(std::string_view s);

struct EpisodeOutcome {
  Termination termination = Termination::STEP_LIMIT;
  std::optional<std::string> fail_reason;  // set iff FAIL
  bool operator==(const EpisodeOutcome&) const = default;
};

/// True when a FAIL reason marks the task as impossible.
bool reason_claims_infeasible(std::string_view reason);

// ---------------------------------------------------------------------------
// Getters

struct GetterSpec {
  std::string type;
  std::string dest;
};

/// vlc_config -> settings["vlc"]; file -> file text at dest;
/// settings_json -> settings[dest]; cookies -> [{domain,name,value}];
/// file_attrs -> {is_dir, hidden, readonly} of dest.
/// Throws PathMissing when the fragment is absent, GetterMissing for an
/// unregistered type.
json fetch_state(const envsim::DeviceState& state, const GetterSpec& getter);

taskspec::GetterRegistry default_getter_registry();

// ---------------------------------------------------------------------------
// Evaluator functions

/// Edit distance over Unicode code points (invalid UTF-8 bytes count as
/// one unit each).
std::size_t levenshtein(std::string_view a, std::string_view b);

/// 1 - lev/max(len); both empty gives 1.
Reward text_similarity(std::string_view candidate, std::string_view golden);

/// rule = {"domains": [...]}. 1 iff no cookie domain contains any listed
/// domain as a substring.
Reward is_cookie_deleted(const json& cookies, const json& rule);

/// rule = {"expected": {path: value}}. A path matches a flat key first,
/// otherwise it is walked through nested objects on '.'.
Reward check_json_settings(const json& doc, const json& rule);

/// Highlight spans are written `<hl>...</hl>`; they may not nest.
struct HighlightDoc {
  std::string plain;
  std::size_t spans = 0;
};
HighlightDoc parse_highlights(std::string_view text);
Reward check_highlighted_words(std::string_view candidate, std::string_view golden);

Reward vis_vlc_recordings_folder(const json& vlc_settings, const json& rules);
Reward check_file_attributes(const json& attrs, const json& rules);
Reward check_file_contains(std::string_view content, const json& rules);
Reward exact_match_file(std::string_view candidate, std::string_view golden);
Reward compare_text_file(std::string_view candidate, std::string_view golden);

// ---------------------------------------------------------------------------
// Registry and dispatch

/// Golden artifacts keyed by task id, then artifact name.
struct GoldenStore {
  std::map<std::string, std::map<std::string, std::string>> artifacts;
  const std::string* find(const std::string& task, const std::string& name) const;
};

struct EvalInputs {
  std::optional<json> fetched;  // absent when the evaluator takes no state
  const json& rules;
  const std::string* golden = nullptr;
};

using EvaluatorFn = std::function<Reward(const EvalInputs&)>;

struct Evaluator {
  taskspec::EvaluatorContract contract;
  EvaluatorFn fn;
};

const std::map<std::string, Evaluator>& evaluators();
taskspec::EvaluatorRegistry default_evaluator_registry();

/// Markdown table of every registered evaluator contract.
std::string evaluator_manifest();

Reward evaluate_task(const envsim::DeviceState& state, const taskspec::TaskSpec& spec,
                     const EpisodeOutcome& outcome, const GoldenStore& golden);

}  // namespace arena::evaluate
