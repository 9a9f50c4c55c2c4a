#pragma once

// Operator commands behind tools/arena. Each command is a plain function so
// tests can drive it without spawning a process.
//
// Exit statuses: 0 success, 1 findings (validation, replay mismatch, bad
// flags), 2 runtime error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arena/corpus.hpp"
#include "arena/orchestrate.hpp"

namespace arena::cli {

ARENA_DEFINE_ERROR(ConfigError);
ARENA_DEFINE_ERROR(DigestMismatch);
ARENA_DEFINE_ERROR(MissingResults);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitRuntime = 2;

struct RunConfig {
  std::string tasks_dir;  // empty: embedded corpus
  std::string policy = "scripted";
  std::string endpoint;  // remote policy URL
  std::size_t workers = 1;
  std::size_t t_max = 20;
  std::uint64_t seed = 0;
  std::string detector = "clean";
  std::string out_dir = "out";
  std::string run_id;                // empty: derived from policy and seed
  std::vector<std::string> bridges;  // bridge worker URLs
};

/// Throws ConfigError on an unknown policy or detector, remote without an
/// endpoint, or zero workers.
void check_config(const RunConfig& cfg);
std::string effective_run_id(const RunConfig& cfg);

/// Embedded corpus when `tasks_dir` is empty, else the exported directory.
corpus::Corpus load_corpus(const std::string& tasks_dir);

/// One `<file>:<keypath>: <finding>` line per problem, files in sorted order.
std::vector<std::string> validate_dir(const std::filesystem::path& dir);
int cmd_validate(const std::filesystem::path& dir, std::ostream& out);

struct RunFiles {
  std::filesystem::path dir;  // out/results/<run-id>
  orchestrate::RunOutput output;
};

/// Writes <task>.jsonl per task, report.json, table.txt and run_meta.json
/// (the only file carrying wall-clock data). Prints the table.
RunFiles cmd_run(const RunConfig& cfg, std::ostream& out);

struct ReplayVerdict {
  std::string task_id;
  std::string logged;
  std::string replayed;
  bool match() const { return logged == replayed; }
};

/// Tasks come from the transcript header, else from `tasks_dir`.
ReplayVerdict replay_file(const std::filesystem::path& transcript, const std::string& tasks_dir = "");
int cmd_replay(const std::filesystem::path& transcript, const std::string& tasks_dir, std::ostream& out);

/// Re-aggregates every *.jsonl under `results_dir`. Throws MissingResults
/// when there are none.
orchestrate::RunReport report_from_dir(const std::filesystem::path& results_dir,
                                       const std::string& tasks_dir = "");
/// Rate table, plus the human row and the per-domain human table when a
/// baseline is given.
std::string render_report(const orchestrate::RunReport& report, const orchestrate::HumanBaseline* human);

std::string sanitize_file_stem(std::string_view id);

/// Full command-line entry point (CLI11). Never throws.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arena::cli
