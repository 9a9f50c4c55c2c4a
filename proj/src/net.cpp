// All HTTP code lives here so httplib is compiled once.

#include <httplib.h>

#include <mutex>
#include <thread>

#include "arena/agent.hpp"
#include "arena/envsim.hpp"
#include "arena/evaluate.hpp"
#include "arena/orchestrate.hpp"

namespace arena {

namespace {

struct Url {
  std::string base;  // scheme://host:port
  std::string path;
};

Url split_url(const std::string& url) {
  auto scheme = url.find("://");
  auto slash = url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

void set_timeouts(httplib::Client& cli, int timeout_ms) {
  const auto d = std::chrono::milliseconds(timeout_ms);
  cli.set_connection_timeout(d);
  cli.set_read_timeout(d);
  cli.set_write_timeout(d);
}

}  // namespace

// ---------------------------------------------------------------------------
// Remote policy

namespace agent {

RemotePolicy::RemotePolicy(std::string endpoint, int timeout_ms, int retries)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms), retries_(retries) {}

std::string RemotePolicy::decide(const PromptBundle& bundle) {
  const Url url = split_url(endpoint_);
  const std::string body = request_body(bundle).dump();
  for (int attempt = 0; attempt <= retries_; ++attempt) {
    httplib::Client cli(url.base);
    set_timeouts(cli, timeout_ms_);
    auto res = cli.Post(url.path, httplib::Headers{{"X-Protocol-Version", kPolicyProtocol}}, body,
                        "application/json");
    if (!res || res->status != 200) continue;
    try {
      auto j = json::parse(res->body);
      if (j.contains("text") && j.at("text").is_string()) return j.at("text").get<std::string>();
    } catch (const json::exception&) {
    }
  }
  return "```decision\n# policy timeout\nFAIL\n```\n";
}

}  // namespace agent

// ---------------------------------------------------------------------------
// Bridge client

namespace orchestrate {

BridgeWorker::BridgeWorker(std::string base_url, int timeout_ms) : timeout_ms_(timeout_ms) {
  while (!base_url.empty() && base_url.back() == '/') base_url.pop_back();
  endpoint_.address = std::move(base_url);
}

namespace {

json bridge_call(const std::string& base, int timeout_ms, const std::string& method, const std::string& path,
                 const json* body) {
  httplib::Client cli(base);
  set_timeouts(cli, timeout_ms);
  httplib::Result res = method == "GET" ? cli.Get(path)
                                        : cli.Post(path, body ? body->dump() : std::string("{}"),
                                                   "application/json");
  if (!res) throw WorkerDead(base + path + ": " + httplib::to_string(res.error()));
  if (res->get_header_value("X-Protocol-Version") != kBridgeProtocol) {
    throw ProtocolError(base + path + ": missing or wrong X-Protocol-Version");
  }
  if (res->status >= 500) throw WorkerDead(base + path + ": HTTP " + std::to_string(res->status));
  json j;
  try {
    j = json::parse(res->body);
  } catch (const json::exception& e) {
    throw ProtocolError(base + path + ": unparseable body");
  }
  if (res->status != 200) {
    const json err = j.value("error", json::object());
    throw Error(err.value("kind", "ProtocolError"),
                err.value("message", "HTTP " + std::to_string(res->status)));
  }
  return j;
}

}  // namespace

WorkerEndpoint BridgeWorker::probe() {
  json h = bridge_call(endpoint_.address, timeout_ms_, "GET", "/health", nullptr);
  endpoint_.protocol_version = h.value("protocol_version", "");
  if (endpoint_.protocol_version != kBridgeProtocol) {
    endpoint_.state = WorkerStatus::dead;
    throw ProtocolError("worker speaks '" + endpoint_.protocol_version + "', expected " + kBridgeProtocol);
  }
  endpoint_.state = h.value("status", "idle") == "busy" ? WorkerStatus::busy : WorkerStatus::idle;
  return endpoint_;
}

agent::EpisodeResult BridgeWorker::run(const taskspec::TaskSpec& task, agent::Policy& policy,
                                       const agent::EpisodeConfig& cfg) {
  try {
    probe();
  } catch (const ProtocolError& e) {
    throw WorkerDead(e.what());
  }
  const auto& base = endpoint_.address;
  endpoint_.state = WorkerStatus::busy;
  json setup{{"task", taskspec::task_to_json(task)}, {"config", cfg}};
  bridge_call(base, timeout_ms_, "POST", "/setup", &setup);
  while (true) {
    json obs = bridge_call(base, timeout_ms_, "GET", "/observation", nullptr);
    if (obs.value("finished", true)) break;
    auto bundle = obs.at("bundle").get<agent::PromptBundle>();
    std::string response;
    try {
      response = policy.decide(bundle);
    } catch (const std::exception&) {
      response.clear();
    }
    json step{{"response", response}};
    bridge_call(base, timeout_ms_, "POST", "/step", &step);
  }
  json result = bridge_call(base, timeout_ms_, "POST", "/evaluate", nullptr);
  endpoint_.state = WorkerStatus::idle;
  return result.get<agent::EpisodeResult>();
}

// ---------------------------------------------------------------------------
// Bridge server

struct BridgeServer::Impl {
  std::shared_ptr<const agent::EnvAssets> assets;
  taskspec::StepRegistry steps = envsim::default_step_registry();
  taskspec::EvaluatorRegistry evaluators = evaluate::default_evaluator_registry();
  taskspec::GetterRegistry getters = evaluate::default_getter_registry();
  httplib::Server svr;
  std::mutex mu;
  std::optional<agent::Episode> episode;
  std::thread thread;
  int port = -1;

  static void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }
  static void fail(httplib::Response& res, int status, const std::string& kind, const std::string& msg) {
    send(res, status, json{{"error", {{"kind", kind}, {"message", msg}}}});
  }

  void routes() {
    svr.set_default_headers({{"X-Protocol-Version", kBridgeProtocol}});
    svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string msg = "internal error";
      try {
        if (ep) std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        msg = e.what();
      } catch (...) {
      }
      fail(res, 500, "InternalError", msg);
    });

    svr.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      const bool busy = episode && !episode->finished();
      send(res, 200, json{{"status", busy ? "busy" : "idle"}, {"protocol_version", kBridgeProtocol}});
    });

    svr.Post("/setup", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        return fail(res, 400, "SyntaxError", e.what());
      }
      if (!body.is_object() || !body.contains("task")) return fail(res, 400, "SchemaError", "body needs 'task'");
      taskspec::TaskSpec task;
      agent::EpisodeConfig cfg;
      try {
        task = taskspec::task_from_json(body.at("task"));
        cfg = body.value("config", json::object()).get<agent::EpisodeConfig>();
      } catch (const Error& e) {
        return fail(res, 400, e.kind(), e.what());
      } catch (const json::exception& e) {
        return fail(res, 400, "SchemaError", e.what());
      }
      auto report = taskspec::validate(task, steps, evaluators, getters);
      if (!report.ok()) {
        std::string msg;
        for (const auto& f : report.findings) msg += (msg.empty() ? "" : "; ") + f.key_path + ": " + f.message;
        return fail(res, 400, "SchemaError", msg);
      }
      std::lock_guard lock(mu);
      try {
        episode.reset();
        episode.emplace(assets, std::move(task), cfg);
      } catch (const Error& e) {
        episode.reset();
        return fail(res, 400, e.kind(), e.what());
      }
      send(res, 200, json{{"status", "ready"}, {"task_id", episode->task().id}});
    });

    svr.Get("/observation", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      if (!episode) return fail(res, 409, "NotReady", "no task set up");
      if (episode->finished()) return send(res, 200, json{{"finished", true}, {"steps", episode->steps()}});
      send(res, 200, json{{"finished", false},
                          {"steps", episode->steps()},
                          {"observation", episode->observation()},
                          {"bundle", episode->bundle()}});
    });

    svr.Post("/step", [this](const httplib::Request& req, httplib::Response& res) {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception& e) {
        return fail(res, 400, "SyntaxError", e.what());
      }
      std::lock_guard lock(mu);
      if (!episode) return fail(res, 409, "NotReady", "no task set up");
      if (episode->finished()) return fail(res, 409, "EpisodeStateError", "episode already finished");
      if (!body.is_object() || !body.contains("response") || !body.at("response").is_string()) {
        return fail(res, 400, "SchemaError", "body needs a string 'response'");
      }
      const auto& rec = episode->step(body.at("response").get<std::string>());
      send(res, 200, json{{"record", rec}, {"finished", episode->finished()}});
    });

    svr.Post("/evaluate", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mu);
      if (!episode) return fail(res, 409, "NotReady", "no task set up");
      try {
        send(res, 200, json(episode->finish()));
      } catch (const Error& e) {
        fail(res, 400, e.kind(), e.what());
      }
    });

    svr.Get("/file", [this](const httplib::Request& req, httplib::Response& res) {
      if (!req.has_param("path")) return fail(res, 400, "SchemaError", "missing 'path' parameter");
      std::lock_guard lock(mu);
      if (!episode) return fail(res, 409, "NotReady", "no task set up");
      const auto path = req.get_param_value("path");
      const auto& files = episode->state().files;
      auto it = files.find(path);
      if (it == files.end() || it->second.is_dir) return fail(res, 404, "PathMissing", path);
      res.status = 200;
      res.set_content(it->second.content, "application/octet-stream");
    });
  }
};

BridgeServer::BridgeServer(std::shared_ptr<const agent::EnvAssets> assets) : impl_(std::make_unique<Impl>()) {
  impl_->assets = std::move(assets);
  impl_->routes();
}

BridgeServer::~BridgeServer() { stop(); }

int BridgeServer::start(const std::string& host, int port) {
  int bound = port == 0 ? impl_->svr.bind_to_any_port(host) : (impl_->svr.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ProtocolError("cannot bind " + host + ":" + std::to_string(port));
  impl_->port = bound;
  impl_->thread = std::thread([this] { impl_->svr.listen_after_bind(); });
  impl_->svr.wait_until_ready();
  return bound;
}

void BridgeServer::serve(const std::string& host, int port) {
  impl_->port = port;
  if (!impl_->svr.listen(host, port)) throw ProtocolError("cannot listen on " + host + ":" + std::to_string(port));
}

void BridgeServer::stop() {
  if (!impl_) return;
  impl_->svr.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int BridgeServer::port() const { return impl_->port; }

}  // namespace orchestrate
}  // namespace arena
