#pragma once

// Suite execution: partitioning, in-process and HTTP bridge workers, result
// aggregation and report rendering.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "arena/agent.hpp"
#include "arena/common.hpp"
#include "arena/taskspec.hpp"

namespace arena::orchestrate {

ARENA_DEFINE_ERROR(WorkerDead);
ARENA_DEFINE_ERROR(UnknownTaskId);
ARENA_DEFINE_ERROR(DuplicateResult);
ARENA_DEFINE_ERROR(ProtocolError);
ARENA_DEFINE_ERROR(BaselineError);

inline constexpr const char* kBridgeProtocol = "waa-bridge/1";

struct Partition {
  std::vector<std::vector<std::string>> assignments;
};

/// Task i goes to worker i mod workers. Throws std::invalid_argument when
/// workers is 0.
Partition partition(const std::vector<std::string>& task_ids, std::size_t workers);

// ---------------------------------------------------------------------------
// Workers

enum class WorkerStatus { idle, busy, dead };
std::string_view worker_status_name(WorkerStatus s);

struct WorkerEndpoint {
  std::string address;
  WorkerStatus state = WorkerStatus::idle;
  std::string protocol_version;
};

class Worker {
 public:
  virtual ~Worker() = default;
  /// Runs one episode. Throws WorkerDead when the worker itself is lost;
  /// other arena::Error kinds mean the task cannot be set up.
  virtual agent::EpisodeResult run(const taskspec::TaskSpec& task, agent::Policy& policy,
                                   const agent::EpisodeConfig& cfg) = 0;
  virtual std::string name() const = 0;
};

class InProcessWorker : public Worker {
 public:
  explicit InProcessWorker(std::shared_ptr<const agent::EnvAssets> assets, std::string name = "local")
      : assets_(std::move(assets)), name_(std::move(name)) {}
  agent::EpisodeResult run(const taskspec::TaskSpec& task, agent::Policy& policy,
                           const agent::EpisodeConfig& cfg) override;
  std::string name() const override { return name_; }

 private:
  std::shared_ptr<const agent::EnvAssets> assets_;
  std::string name_;
};

/// Drives a remote BridgeServer. The policy runs on this side.
class BridgeWorker : public Worker {
 public:
  explicit BridgeWorker(std::string base_url, int timeout_ms = 30000);
  agent::EpisodeResult run(const taskspec::TaskSpec& task, agent::Policy& policy,
                           const agent::EpisodeConfig& cfg) override;
  std::string name() const override { return endpoint_.address; }

  /// GET /health; fills endpoint().protocol_version. Throws WorkerDead when
  /// unreachable and ProtocolError on a version mismatch.
  WorkerEndpoint probe();
  const WorkerEndpoint& endpoint() const { return endpoint_; }

 private:
  WorkerEndpoint endpoint_;
  int timeout_ms_;
};

/// Hosts one episode at a time behind the bridge protocol.
class BridgeServer {
 public:
  explicit BridgeServer(std::shared_ptr<const agent::EnvAssets> assets);
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Binds and serves on a background thread. Port 0 picks a free port.
  /// Returns the bound port; throws ProtocolError when binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Binds and serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();
  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Suites and reports

struct RunOptions {
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  std::size_t t_max = 20;
  std::size_t n_history = 5;
  std::string detector = "clean";
  std::size_t wait_limit = 0;
  /// Bridge worker base URLs; when non-empty they replace in-process workers.
  std::vector<std::string> endpoints;
};

/// Episode config for one task; the seed is derive_seed(options.seed, id).
agent::EpisodeConfig episode_config(const RunOptions& options, const std::string& task_id);

/// Report table columns, in order; the last is the total.
inline constexpr std::array<const char*, 7> kReportColumns = {
    "Office", "Web Browser", "Windows System", "Coding", "Media & Video", "Windows Utils", "Total"};
std::string_view report_column(taskspec::Domain d);

struct TaskSummary {
  std::string task_id;
  std::string category;
  double reward = 0.0;
  bool continuous = false;
  bool success = false;
  std::size_t steps = 0;
  std::string termination;
  std::string final_digest;
  bool errored = false;
  std::string error;
};

struct CategoryStats {
  std::size_t successes = 0;
  std::size_t attempts = 0;
  std::size_t success_steps = 0;  // summed over successful episodes
  double rate() const { return attempts == 0 ? 0.0 : double(successes) / double(attempts); }
  double avg_steps() const { return successes == 0 ? 0.0 : double(success_steps) / double(successes); }
};

struct RunReport {
  std::map<std::string, TaskSummary> per_task;
  std::map<std::string, CategoryStats> per_category;  // keyed by report column
  CategoryStats overall;
  std::map<std::string, double> timing;  // worker -> seconds; not in report_json
};

/// Continuous rewards succeed at >= 0.5, binary ones at exactly 1.
bool is_success(const evaluate::Reward& r);

/// Throws UnknownTaskId for a result outside the suite and DuplicateResult
/// for a task reported twice.
RunReport aggregate(const std::vector<agent::EpisodeResult>& results, const taskspec::TaskSuite& suite);

/// Canonical report JSON without timing.
json report_json(const RunReport& r);
json timing_json(const RunReport& r);

struct RunOutput {
  RunReport report;
  std::vector<agent::EpisodeResult> results;  // suite order
};

RunOutput run_suite(const taskspec::TaskSuite& suite, std::shared_ptr<const agent::EnvAssets> assets,
                    const agent::PolicyFactory& policies, const RunOptions& options);

/// Same as run_suite with caller-supplied workers (used to inject failures).
RunOutput run_suite_with(const taskspec::TaskSuite& suite, std::vector<std::unique_ptr<Worker>>& workers,
                         const agent::PolicyFactory& policies, const RunOptions& options);

// ---------------------------------------------------------------------------
// Human baseline

struct HumanDomainRow {
  std::string domain;
  double avg_steps = 0;
  double success_pct = 0;
  double difficulty = 0;
};

struct HumanBaseline {
  std::array<double, 7> column_rates{};  // percent, kReportColumns order
  std::vector<HumanDomainRow> rows;
  HumanDomainRow overall;
};

HumanBaseline parse_human_baseline(const json& j);
HumanBaseline load_human_baseline(const std::filesystem::path& file);
/// Shipped fixture under the data directory.
std::filesystem::path default_human_baseline_path();

/// Fixed-width success-rate table, one decimal. The human row is appended
/// when a baseline is given.
std::string render_rate_table(const RunReport& report, const HumanBaseline* human = nullptr,
                              const std::string& agent_label = "Agent");

/// Per-domain steps / success / difficulty table.
std::string render_human_stats(const HumanBaseline& human);

}  // namespace arena::orchestrate
