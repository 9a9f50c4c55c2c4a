#pragma once

// Episode runner: prompt assembly, policy invocation, response parsing,
// history and memory handling, termination and final evaluation.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "arena/actions.hpp"
#include "arena/common.hpp"
#include "arena/envsim.hpp"
#include "arena/evaluate.hpp"
#include "arena/observe.hpp"
#include "arena/taskspec.hpp"

namespace arena::agent {

ARENA_DEFINE_ERROR(MalformedResponse);
ARENA_DEFINE_ERROR(EpisodeStateError);

inline constexpr const char* kPolicyProtocol = "waa-policy/1";

/// Everything an environment needs besides the task: app models, download
/// fixtures and golden artifacts.
struct EnvAssets {
  envsim::AppCatalog catalog;
  envsim::FixtureStore fixtures;
  evaluate::GoldenStore golden;
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::string element_table;
  observe::AnnotatedScreen screen;
  std::optional<observe::AnnotatedScreen> previous_screen;
  std::string memory;
  std::string task_id;
  std::size_t step = 0;

  /// SHA-256 over system and user text.
  std::string digest() const;
};

void to_json(json& j, const PromptBundle& b);
void from_json(const json& j, PromptBundle& b);

/// Fixed instruction block sent as the system prompt.
const std::string& system_prompt();

/// `history` holds one rendered code block per past step, oldest first;
/// only the last `n_history` are included.
PromptBundle build_prompt(const observe::Observation& obs, const std::vector<std::string>& history,
                          const std::string& memory, std::size_t n_history, std::size_t step,
                          const std::string& task_id);

enum class DecisionKind { DONE, FAIL, WAIT, COMMAND };
std::string_view decision_name(DecisionKind k);

struct AgentDecision {
  DecisionKind kind = DecisionKind::WAIT;
  std::optional<actions::ActionProgram> program;  // iff COMMAND
  std::optional<std::string> memory_update;
  std::optional<std::string> fail_reason;  // iff FAIL

  bool operator==(const AgentDecision& o) const;
};

/// Reads the first ```decision block (its last bare keyword wins; comment
/// text becomes the FAIL reason), the first ```python block for COMMAND and
/// an optional ```memory block. Text outside fences is ignored.
AgentDecision parse_response(std::string_view text);

/// Canonical response text; parse_response(render_decision(d)) == d.
std::string render_decision(const AgentDecision& d);

// ---------------------------------------------------------------------------
// Policies

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string decide(const PromptBundle& bundle) = 0;
};

/// Replays responses by step index; past the end answers FAIL.
class ScriptedPolicy : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<std::string> script) : script_(std::move(script)) {}
  std::string decide(const PromptBundle& bundle) override;

 private:
  std::vector<std::string> script_;
};

/// Seeded random actions drawn from the current screen. Deterministic for a
/// given seed and bundle sequence.
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed) {}
  std::string decide(const PromptBundle& bundle) override;

 private:
  std::uint64_t seed_;
};

/// HTTP transport to an external model server (see docs/protocols.md).
class RemotePolicy : public Policy {
 public:
  RemotePolicy(std::string endpoint, int timeout_ms = 30000, int retries = 2);
  std::string decide(const PromptBundle& bundle) override;
  static json request_body(const PromptBundle& bundle);

 private:
  std::string endpoint_;
  int timeout_ms_;
  int retries_;
};

using PolicyFactory =
    std::function<std::unique_ptr<Policy>(const taskspec::TaskSpec& task, std::uint64_t seed)>;

// ---------------------------------------------------------------------------
// Episodes

struct EpisodeConfig {
  std::size_t t_max = 20;
  std::size_t n_history = 5;
  std::string detector = "clean";
  std::uint64_t seed = 0;
  /// Consecutive WAITs that end the episode with WAIT_TIMEOUT; 0 disables.
  std::size_t wait_limit = 0;
};

void to_json(json& j, const EpisodeConfig& c);
void from_json(const json& j, EpisodeConfig& c);

struct StepRecord {
  std::size_t index = 0;
  std::string prompt_digest;
  std::string response;
  std::string decision;  // DONE/FAIL/WAIT/COMMAND or MALFORMED
  std::string program;   // canonical source of executed calls
  actions::EffectLog log;
  std::vector<envsim::EffectRecord> tick;  // WAIT effects
  std::string error;
  std::string snapshot_digest;  // state after the step
};

void to_json(json& j, const StepRecord& s);
void from_json(const json& j, StepRecord& s);

struct EpisodeResult {
  std::string task_id;
  std::uint64_t seed = 0;
  evaluate::Reward reward;
  std::size_t steps = 0;
  evaluate::EpisodeOutcome outcome;
  std::string memory_final;
  std::vector<StepRecord> transcript;
  std::string final_digest;
  bool errored = false;
  std::string error;
};

void to_json(json& j, const EpisodeResult& r);
void from_json(const json& j, EpisodeResult& r);

/// Incremental episode driver shared by run_episode and the bridge server.
class Episode {
 public:
  /// Resets the device and applies the task config. Throws arena::Error
  /// subclasses when the config cannot be applied.
  Episode(std::shared_ptr<const EnvAssets> assets, taskspec::TaskSpec task, EpisodeConfig cfg);

  bool finished() const { return finished_; }
  std::size_t steps() const { return steps_; }
  const envsim::DeviceState& state() const { return state_; }
  const taskspec::TaskSpec& task() const { return task_; }
  const EpisodeConfig& config() const { return cfg_; }

  /// Observation and prompt for the upcoming step (cached until step()).
  const observe::Observation& observation();
  const PromptBundle& bundle();

  /// Consumes one policy response. Throws EpisodeStateError when finished.
  const StepRecord& step(const std::string& response);

  /// Evaluates the final state; idempotent. Marks the episode finished.
  const EpisodeResult& finish();

 private:
  void refresh();
  void end(evaluate::Termination t, std::optional<std::string> reason = std::nullopt);

  std::shared_ptr<const EnvAssets> assets_;
  taskspec::TaskSpec task_;
  EpisodeConfig cfg_;
  observe::DetectorConfig detector_;
  envsim::DeviceState state_;
  actions::CursorState cursor_;
  std::vector<std::string> history_;
  std::string memory_;
  std::optional<observe::AnnotatedScreen> previous_;
  std::optional<observe::Observation> obs_;
  std::optional<PromptBundle> bundle_;
  std::vector<StepRecord> transcript_;
  std::size_t steps_ = 0;
  std::size_t consecutive_waits_ = 0;
  bool finished_ = false;
  evaluate::EpisodeOutcome outcome_;
  std::optional<EpisodeResult> result_;
};

EpisodeResult run_episode(std::shared_ptr<const EnvAssets> assets, const taskspec::TaskSpec& task,
                          Policy& policy, const EpisodeConfig& cfg);

/// Re-executes the transcript's programs and WAITs on a fresh device.
envsim::DeviceState replay_transcript(const EnvAssets& assets, const taskspec::TaskSpec& task,
                                      const EpisodeConfig& cfg,
                                      const std::vector<StepRecord>& transcript);

/// JSONL: header line, one line per step, result line. The header carries
/// the task itself when `task` is given, so the file can be replayed alone.
std::string transcript_jsonl(const EpisodeResult& result, const EpisodeConfig& cfg,
                             const taskspec::TaskSpec* task = nullptr);
/// Inverse of transcript_jsonl.
std::pair<EpisodeConfig, EpisodeResult> parse_transcript_jsonl(std::string_view text);
/// Task embedded in the header line, if any.
std::optional<taskspec::TaskSpec> transcript_task(std::string_view text);

}  // namespace arena::agent
