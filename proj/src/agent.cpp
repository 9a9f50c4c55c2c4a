#include "arena/agent.hpp"

#include <sstream>

namespace arena::agent {

// ---------------------------------------------------------------------------
// Prompts

const std::string& system_prompt() {
  static const std::string text = [] {
    std::string s =
        "You operate a simulated Windows desktop for a user. Each turn brings the sections\n"
        "numbered 1 to 9 below. Reply with fenced blocks; text outside them is ignored.\n"
        "\n"
        "```decision\n"
        "COMMAND\n"
        "```\n"
        "One of DONE, FAIL, WAIT or COMMAND. Lines starting with # are comments; for FAIL\n"
        "they are read as the reason. Say \"infeasible\" in the reason when the request\n"
        "cannot be done at all.\n"
        "\n"
        "```python\n"
        "computer.os.open_program(\"notepad\")\n"
        "```\n"
        "Required for COMMAND. One call per line, literal arguments only.\n"
        "\n"
        "```memory\n"
        "notes for later steps\n"
        "```\n"
        "Optional. Replaces the stored memory.\n"
        "\n"
        "Calls:\n";
    for (const auto& f : actions::action_table()) {
      std::string params;
      for (const auto& p : f.params) {
        if (!params.empty()) params += ", ";
        params += p.name + (p.required ? "" : "=None");
      }
      s += "computer." + std::string(actions::group_name(f.group)) + "." + f.name + "(" + params + ")  " +
           f.summary + "\n";
    }
    return s;
  }();
  return text;
}

std::string PromptBundle::digest() const { return sha256_hex(system_text + "\n\x1f\n" + user_text); }

void to_json(json& j, const PromptBundle& b) {
  j = json{{"system", b.system_text}, {"user", b.user_text}, {"screen_table", b.element_table},
           {"screen", b.screen},      {"memory", b.memory},  {"task_id", b.task_id},
           {"step", b.step}};
  if (b.previous_screen) j["previous_screen"] = *b.previous_screen;
}

void from_json(const json& j, PromptBundle& b) {
  b = PromptBundle{};
  b.system_text = j.at("system").get<std::string>();
  b.user_text = j.at("user").get<std::string>();
  b.element_table = j.value("screen_table", "");
  if (j.contains("screen")) b.screen = j.at("screen").get<observe::AnnotatedScreen>();
  if (j.contains("previous_screen")) b.previous_screen = j.at("previous_screen").get<observe::AnnotatedScreen>();
  b.memory = j.value("memory", "");
  b.task_id = j.value("task_id", "");
  b.step = j.value("step", std::size_t{0});
}

namespace {

std::string rstrip_lines(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    auto end = line.find_last_not_of(' ');
    lines.push_back(end == std::string::npos ? "" : line.substr(0, end + 1));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

PromptBundle build_prompt(const observe::Observation& obs, const std::vector<std::string>& history,
                          const std::string& memory, std::size_t n_history, std::size_t step,
                          const std::string& task_id) {
  std::string u;
  u += "# 1. User objective\n" + obs.instruction + "\n\n";
  u += "# 2. Window title\n" + obs.foreground_title + "\n\n";
  u += "# 3. All window names\n";
  for (const auto& t : obs.all_window_titles) u += "- " + t + "\n";
  u += "\n# 4. Clipboard content\n" + obs.clipboard_text + "\n\n";
  u += "# 5. Text rendering\n```\n" + rstrip_lines(obs.text_rendering) + "```\n\n";
  u += "# 6. List of candidate screen elements\n" + obs.element_table + "\n";
  u += "# 7. Screen images\n";
  u += "previous: " +
       (obs.previous_screen ? std::to_string(obs.previous_screen->elements.size()) + " marked elements"
                            : std::string("none")) +
       "\n";
  u += "current: " + std::to_string(obs.screen.elements.size()) + " marked elements\n\n";
  u += "# 8. History of previous actions\n";
  std::size_t first = history.size() > n_history ? history.size() - n_history : 0;
  for (std::size_t i = first; i < history.size(); ++i) {
    u += "## Step " + std::to_string(i) + "\n```python\n" + history[i] + "\n```\n";
  }
  u += "\n# 9. Textual memory\n" + memory + "\n";

  PromptBundle b;
  b.system_text = system_prompt();
  b.user_text = std::move(u);
  b.element_table = obs.element_table;
  b.screen = obs.screen;
  b.previous_screen = obs.previous_screen;
  b.memory = memory;
  b.task_id = task_id;
  b.step = step;
  return b;
}

// ---------------------------------------------------------------------------
// Responses

std::string_view decision_name(DecisionKind k) {
  switch (k) {
    case DecisionKind::DONE: return "DONE";
    case DecisionKind::FAIL: return "FAIL";
    case DecisionKind::WAIT: return "WAIT";
    case DecisionKind::COMMAND: return "COMMAND";
  }
  return "";
}

bool AgentDecision::operator==(const AgentDecision& o) const {
  auto sources = [](const std::optional<actions::ActionProgram>& p) {
    std::vector<std::string> out;
    if (p) {
      for (const auto& c : p->calls) out.push_back(c.to_source());
    }
    return out;
  };
  return kind == o.kind && memory_update == o.memory_update && fail_reason == o.fail_reason &&
         program.has_value() == o.program.has_value() && sources(program) == sources(o.program);
}

namespace {

/// Body of the first fenced block tagged `lang`, or nullopt.
std::optional<std::string> fenced_block(std::string_view text, std::string_view lang) {
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("```", pos);
    if (open == std::string_view::npos) return std::nullopt;
    auto eol = text.find('\n', open);
    if (eol == std::string_view::npos) return std::nullopt;
    std::string tag = trim(text.substr(open + 3, eol - open - 3));
    auto close = text.find("```", eol + 1);
    if (close == std::string_view::npos) return std::nullopt;
    if (tag == lang) {
      std::string body(text.substr(eol + 1, close - eol - 1));
      if (!body.empty() && body.back() == '\n') body.pop_back();
      return body;
    }
    pos = close + 3;
  }
}

}  // namespace

AgentDecision parse_response(std::string_view text) {
  auto block = fenced_block(text, "decision");
  if (!block) throw MalformedResponse("no decision block");
  std::optional<DecisionKind> kind;
  std::vector<std::string> comments;
  std::istringstream in(*block);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    std::string code = trim(line.substr(0, hash));
    if (hash != std::string::npos) {
      std::string c = trim(line.substr(hash + 1));
      if (!c.empty()) comments.push_back(c);
    }
    if (code.empty()) continue;
    std::string word = code;
    for (auto& ch : word) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    for (auto k : {DecisionKind::DONE, DecisionKind::FAIL, DecisionKind::WAIT, DecisionKind::COMMAND}) {
      if (word == decision_name(k)) kind = k;
    }
  }
  if (!kind) throw MalformedResponse("decision block has no DONE/FAIL/WAIT/COMMAND keyword");

  AgentDecision d;
  d.kind = *kind;
  if (d.kind == DecisionKind::FAIL) {
    std::string reason;
    for (const auto& c : comments) reason += (reason.empty() ? "" : " ") + c;
    d.fail_reason = reason.empty() ? "unspecified" : reason;
  }
  if (d.kind == DecisionKind::COMMAND) {
    auto code = fenced_block(text, "python");
    if (!code) throw MalformedResponse("COMMAND without a python block");
    try {
      d.program = actions::parse_program(*code);
    } catch (const Error& e) {
      throw MalformedResponse(e.kind() + ": " + e.what());
    }
  }
  d.memory_update = fenced_block(text, "memory");
  return d;
}

std::string render_decision(const AgentDecision& d) {
  std::string out = "```decision\n";
  if (d.kind == DecisionKind::FAIL && d.fail_reason) out += "# " + *d.fail_reason + "\n";
  out += std::string(decision_name(d.kind)) + "\n```\n";
  if (d.program) {
    out += "```python\n";
    for (const auto& c : d.program->calls) out += c.to_source() + "\n";
    out += "```\n";
  }
  if (d.memory_update) out += "```memory\n" + *d.memory_update + "\n```\n";
  return out;
}

// ---------------------------------------------------------------------------
// Policies

std::string ScriptedPolicy::decide(const PromptBundle& bundle) {
  if (bundle.step < script_.size()) return script_[bundle.step];
  return "```decision\n# script exhausted\nFAIL\n```\n";
}

std::string RandomPolicy::decide(const PromptBundle& bundle) {
  Rng rng(mix_seed(seed_, bundle.step));
  const double u = rng.uniform();
  if (u < 0.05) return "```decision\nDONE\n```\n";
  if (u < 0.08) return "```decision\n# giving up\nFAIL\n```\n";
  if (u < 0.18) return "```decision\nWAIT\n```\n";

  static const char* kPrograms[] = {"vlc", "msedge", "notepad", "settings", "file_explorer",
                                    "vscode", "clock", "writer", "calc"};
  static const char* kKeys[] = {"enter", "tab", "backspace", "escape", "ctrl+a", "ctrl+s"};
  static const char* kWords[] = {"hello", "Desktop", "500", "amazon.com", "draft", "true"};
  auto lit = [](const std::string& s) { return callexpr::render_literal(s); };
  std::string code;
  const std::size_t n = bundle.screen.elements.size();
  const double a = rng.uniform();
  if (a < 0.45 && n > 0) {
    code = "computer.mouse.move_id(id=" + std::to_string(rng.below(n)) + ")\n";
    code += rng.chance(0.15) ? "computer.mouse.double_click()\n" : "computer.mouse.single_click()\n";
  } else if (a < 0.6) {
    code = "computer.keyboard.write(" + lit(kWords[rng.below(std::size(kWords))]) + ")\n";
  } else if (a < 0.7) {
    code = "computer.keyboard.press(" + lit(kKeys[rng.below(std::size(kKeys))]) + ")\n";
  } else if (a < 0.8) {
    code = std::string("computer.mouse.scroll(dir=") + (rng.chance(0.5) ? "\"down\"" : "\"up\"") + ")\n";
  } else if (a < 0.9) {
    code = "computer.os.open_program(" + lit(kPrograms[rng.below(std::size(kPrograms))]) + ")\n";
  } else {
    code = "computer.mouse.move_abs(x=" + format_trimmed(rng.uniform(), 3) +
           ", y=" + format_trimmed(rng.uniform(), 3) + ")\ncomputer.mouse.single_click()\n";
  }
  return "```decision\nCOMMAND\n```\n```python\n" + code + "```\n";
}

json RemotePolicy::request_body(const PromptBundle& b) {
  return json{{"system", b.system_text},
              {"user", b.user_text},
              {"screen_table", b.element_table},
              {"memory", b.memory},
              {"step", b.step}};
}

// ---------------------------------------------------------------------------
// Serialization

void to_json(json& j, const EpisodeConfig& c) {
  j = json{{"t_max", c.t_max}, {"n_history", c.n_history}, {"detector", c.detector},
           {"seed", c.seed},   {"wait_limit", c.wait_limit}};
}

void from_json(const json& j, EpisodeConfig& c) {
  c = EpisodeConfig{};
  c.t_max = j.value("t_max", c.t_max);
  c.n_history = j.value("n_history", c.n_history);
  c.detector = j.value("detector", c.detector);
  c.seed = j.value("seed", c.seed);
  c.wait_limit = j.value("wait_limit", c.wait_limit);
}

void to_json(json& j, const StepRecord& s) {
  json log = json::array();
  for (const auto& e : s.log.entries) log.push_back(e);
  j = json{{"index", s.index},       {"prompt_digest", s.prompt_digest},
           {"response", s.response}, {"decision", s.decision},
           {"program", s.program},   {"log", log},
           {"tick", s.tick},         {"error", s.error},
           {"snapshot_digest", s.snapshot_digest}};
}

void from_json(const json& j, StepRecord& s) {
  s = StepRecord{};
  s.index = j.at("index").get<std::size_t>();
  s.prompt_digest = j.value("prompt_digest", "");
  s.response = j.at("response").get<std::string>();
  s.decision = j.at("decision").get<std::string>();
  s.program = j.value("program", "");
  for (const auto& e : j.value("log", json::array())) s.log.entries.push_back(e.get<actions::LogEntry>());
  s.tick = j.value("tick", std::vector<envsim::EffectRecord>{});
  s.error = j.value("error", "");
  s.snapshot_digest = j.value("snapshot_digest", "");
}

namespace {

json result_header(const EpisodeResult& r) {
  json j{{"task_id", r.task_id},
         {"seed", r.seed},
         {"reward", r.reward},
         {"steps", r.steps},
         {"termination", evaluate::termination_name(r.outcome.termination)},
         {"memory_final", r.memory_final},
         {"final_digest", r.final_digest},
         {"errored", r.errored}};
  j["fail_reason"] = r.outcome.fail_reason ? json(*r.outcome.fail_reason) : json(nullptr);
  if (r.errored) j["error"] = r.error;
  return j;
}

void read_header(const json& j, EpisodeResult& r) {
  r.task_id = j.at("task_id").get<std::string>();
  r.seed = j.value("seed", std::uint64_t{0});
  r.reward = j.at("reward").get<evaluate::Reward>();
  r.steps = j.at("steps").get<std::size_t>();
  r.outcome.termination = evaluate::parse_termination(j.at("termination").get<std::string>());
  if (j.contains("fail_reason") && !j.at("fail_reason").is_null()) {
    r.outcome.fail_reason = j.at("fail_reason").get<std::string>();
  }
  r.memory_final = j.value("memory_final", "");
  r.final_digest = j.value("final_digest", "");
  r.errored = j.value("errored", false);
  r.error = j.value("error", "");
}

}  // namespace

void to_json(json& j, const EpisodeResult& r) {
  j = result_header(r);
  j["transcript"] = r.transcript;
}

void from_json(const json& j, EpisodeResult& r) {
  r = EpisodeResult{};
  read_header(j, r);
  r.transcript = j.value("transcript", std::vector<StepRecord>{});
}

std::string transcript_jsonl(const EpisodeResult& result, const EpisodeConfig& cfg, const taskspec::TaskSpec* task) {
  json head{{"type", "header"}, {"task_id", result.task_id}, {"config", cfg}};
  if (task) head["task"] = taskspec::task_to_json(*task);
  std::string out = head.dump() + "\n";
  for (const auto& s : result.transcript) {
    json j = s;
    j["type"] = "step";
    out += j.dump() + "\n";
  }
  json tail = result_header(result);
  tail["type"] = "result";
  out += tail.dump() + "\n";
  return out;
}

std::pair<EpisodeConfig, EpisodeResult> parse_transcript_jsonl(std::string_view text) {
  EpisodeConfig cfg;
  EpisodeResult result;
  bool header = false, tail = false;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    const std::string type = j.at("type").get<std::string>();
    if (type == "header") {
      cfg = j.at("config").get<EpisodeConfig>();
      header = true;
    } else if (type == "step") {
      result.transcript.push_back(j.get<StepRecord>());
    } else if (type == "result") {
      read_header(j, result);
      tail = true;
    }
  }
  if (!header || !tail) throw MalformedResponse("transcript is missing its header or result line");
  return {cfg, result};
}

std::optional<taskspec::TaskSpec> transcript_task(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    if (j.value("type", "") != "header") continue;
    if (!j.contains("task")) return std::nullopt;
    return taskspec::task_from_json(j.at("task"));
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Episodes

Episode::Episode(std::shared_ptr<const EnvAssets> assets, taskspec::TaskSpec task, EpisodeConfig cfg)
    : assets_(std::move(assets)),
      task_(std::move(task)),
      cfg_(std::move(cfg)),
      detector_(observe::detector_profile(cfg_.detector)) {
  state_ = envsim::reset(assets_->catalog, cfg_.seed);
  envsim::apply_config(assets_->catalog, assets_->fixtures, state_, task_.config);
  if (cfg_.t_max == 0) end(evaluate::Termination::STEP_LIMIT);
}

void Episode::refresh() {
  if (obs_) return;
  obs_ = observe::build_observation(state_, detector_, task_.instruction, previous_,
                                    mix_seed(cfg_.seed, steps_));
  bundle_ = build_prompt(*obs_, history_, memory_, cfg_.n_history, steps_, task_.id);
}

const observe::Observation& Episode::observation() {
  refresh();
  return *obs_;
}

const PromptBundle& Episode::bundle() {
  refresh();
  return *bundle_;
}

void Episode::end(evaluate::Termination t, std::optional<std::string> reason) {
  finished_ = true;
  outcome_ = {t, std::move(reason)};
}

const StepRecord& Episode::step(const std::string& response) {
  if (finished_) throw EpisodeStateError("episode already finished");
  refresh();
  StepRecord rec;
  rec.index = steps_;
  rec.prompt_digest = bundle_->digest();
  rec.response = response;

  bool waited = false;
  try {
    AgentDecision d = parse_response(response);
    rec.decision = decision_name(d.kind);
    if (d.memory_update) memory_ = *d.memory_update;
    switch (d.kind) {
      case DecisionKind::DONE:
        history_.push_back("# DONE");
        end(evaluate::Termination::DONE);
        break;
      case DecisionKind::FAIL:
        history_.push_back("# FAIL");
        end(evaluate::Termination::FAIL, d.fail_reason);
        break;
      case DecisionKind::WAIT:
        waited = true;
        rec.tick.push_back(envsim::tick_wait(assets_->catalog, state_));
        history_.push_back("# WAIT");
        break;
      case DecisionKind::COMMAND: {
        std::string src;
        for (const auto& c : d.program->calls) src += (src.empty() ? "" : "\n") + c.to_source();
        rec.program = src;
        rec.log = actions::execute_program(assets_->catalog, state_, cursor_, *d.program, obs_->screen);
        if (rec.log.failed()) {
          const auto& last = rec.log.entries.back();
          rec.error = last.error_kind + ": " + last.error_message;
        }
        history_.push_back(src.empty() ? "# (empty program)" : src);
        break;
      }
    }
  } catch (const MalformedResponse& e) {
    rec.decision = "MALFORMED";
    rec.error = e.what();
    history_.push_back("# no-op: malformed response");
  } catch (const Error& e) {
    rec.error = e.kind() + ": " + e.what();
  }

  consecutive_waits_ = waited ? consecutive_waits_ + 1 : 0;
  ++steps_;
  previous_ = obs_->screen;
  obs_.reset();
  bundle_.reset();
  rec.snapshot_digest = envsim::snapshot_digest(state_);
  if (!finished_) {
    if (cfg_.wait_limit > 0 && consecutive_waits_ >= cfg_.wait_limit) {
      end(evaluate::Termination::WAIT_TIMEOUT);
    } else if (steps_ >= cfg_.t_max) {
      end(evaluate::Termination::STEP_LIMIT);
    }
  }
  transcript_.push_back(std::move(rec));
  return transcript_.back();
}

const EpisodeResult& Episode::finish() {
  if (result_) return *result_;
  if (!finished_) end(evaluate::Termination::STEP_LIMIT);
  EpisodeResult r;
  r.task_id = task_.id;
  r.seed = cfg_.seed;
  r.reward = evaluate::evaluate_task(state_, task_, outcome_, assets_->golden);
  r.steps = steps_;
  r.outcome = outcome_;
  r.memory_final = memory_;
  r.transcript = transcript_;
  r.final_digest = envsim::snapshot_digest(state_);
  result_ = std::move(r);
  return *result_;
}

EpisodeResult run_episode(std::shared_ptr<const EnvAssets> assets, const taskspec::TaskSpec& task,
                          Policy& policy, const EpisodeConfig& cfg) {
  Episode ep(std::move(assets), task, cfg);
  while (!ep.finished()) {
    std::string response;
    try {
      response = policy.decide(ep.bundle());
    } catch (const std::exception& e) {
      // A crashing policy produces an empty (malformed) response.
      response.clear();
    }
    ep.step(response);
  }
  return ep.finish();
}

envsim::DeviceState replay_transcript(const EnvAssets& assets, const taskspec::TaskSpec& task,
                                      const EpisodeConfig& cfg,
                                      const std::vector<StepRecord>& transcript) {
  const auto detector = observe::detector_profile(cfg.detector);
  envsim::DeviceState state = envsim::reset(assets.catalog, cfg.seed);
  envsim::apply_config(assets.catalog, assets.fixtures, state, task.config);
  actions::CursorState cursor;
  for (const auto& rec : transcript) {
    if (rec.decision == "WAIT") {
      envsim::tick_wait(assets.catalog, state);
    } else if (rec.decision == "COMMAND") {
      auto screen = observe::merge_som(
          observe::collect_elements(state, detector, mix_seed(cfg.seed, rec.index)),
          detector.iou_threshold, mix_seed(cfg.seed, rec.index));
      auto program = parse_response(rec.response).program;
      actions::execute_program(assets.catalog, state, cursor, *program, screen);
    }
  }
  return state;
}

}  // namespace arena::agent
