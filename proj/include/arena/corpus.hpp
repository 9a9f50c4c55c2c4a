#pragma once

// Embedded task corpus: app models, tasks, download fixtures, golden
// artifacts and oracle scripts.

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "arena/agent.hpp"
#include "arena/envsim.hpp"
#include "arena/taskspec.hpp"

namespace arena::corpus {

ARENA_DEFINE_ERROR(UnknownTask);
ARENA_DEFINE_ERROR(CorpusError);

struct ManifestEntry {
  std::string task_id;
  std::string file;  // relative task file path
  std::string domain;
  bool feasible = true;
  std::string oracle;  // oracle script id (file stem under oracles/)
  std::map<std::string, std::string> golden;  // artifact name -> sha256
  bool adapted = false;  // instruction or feasibility differs from the source list
  std::string note;
};

struct Corpus {
  taskspec::TaskSuite suite;
  std::shared_ptr<const agent::EnvAssets> assets;
  std::map<std::string, std::vector<std::string>> oracles;  // task id -> responses
  std::vector<ManifestEntry> manifest;                       // suite order
};

/// Every app model the corpus needs.
envsim::AppCatalog app_catalog();

Corpus build_corpus();
/// Built once, shared.
const Corpus& builtin();

/// Throws UnknownTask.
const std::vector<std::string>& oracle_script(const Corpus& corpus, const std::string& task_id);

/// Scripted policies replaying each task's oracle.
agent::PolicyFactory oracle_policies(const Corpus& corpus);

json manifest_json(const Corpus& corpus);

/// Writes tasks/ (with suite.txt), fixtures/, golden/<task>/, oracles/ and
/// manifest.json under `dir`.
void export_corpus(const Corpus& corpus, const std::filesystem::path& dir);

/// Reads an exported directory back. App models always come from
/// app_catalog(). A missing oracles/ or golden/ directory is allowed.
/// Throws CorpusError when a golden artifact does not match its manifest
/// digest.
Corpus load_corpus_dir(const std::filesystem::path& dir);

/// `dir/tasks` when it exists, else `dir`.
std::filesystem::path tasks_root(const std::filesystem::path& dir);

}  // namespace arena::corpus
