// Copyright 2026 The HybridSched Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hybridsched/server.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>

#include "httplib.h"

namespace hybridsched {

using json = nlohmann::json;

CommandStream::CommandStream() : worker_([this] { loop(); }) {}

CommandStream::~CommandStream() { stop(); }

void CommandStream::stop() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void CommandStream::post(std::function<void()> fn) {
  {
    std::lock_guard lock(mu_);
    if (stopping_) throw std::runtime_error("command stream stopped");
    queue_.push_back(std::move(fn));
  }
  cv_.notify_one();
}

void CommandStream::loop() {
  for (;;) {
    std::function<void()> fn;
    {
      std::unique_lock lock(mu_);
      cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      // drain what was posted before stop() so no caller waits forever
      if (queue_.empty()) return;
      fn = std::move(queue_.front());
      queue_.pop_front();
    }
    fn();
  }
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void only_fields(const json& j, std::initializer_list<const char*> allowed,
                 const char* what) {
  if (!j.is_object()) {
    throw Error(ErrorCode::ParseError, std::string(what) + " must be an object");
  }
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* k) { return key == k; })) {
      throw Error(ErrorCode::ParseError,
                  std::string(what) + ": unknown field '" + key + "'");
    }
  }
}

template <typename T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config.") + key + ": " + e.what());
  }
}

Quota parse_quota(const json& j) {
  only_fields(j, {"max_concurrent_jobs", "max_nodes_in_use", "max_vcluster_nodes"},
              "quota");
  Quota q;
  if (j.contains("max_concurrent_jobs")) q.max_concurrent_jobs = get<std::int64_t>(j, "max_concurrent_jobs");
  if (j.contains("max_nodes_in_use")) q.max_nodes_in_use = get<std::int64_t>(j, "max_nodes_in_use");
  if (j.contains("max_vcluster_nodes")) q.max_vcluster_nodes = get<std::int64_t>(j, "max_vcluster_nodes");
  return q;
}

}  // namespace

void parse_listen_address(const std::string& addr, ServiceConfig& config) {
  auto colon = addr.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::ParseError, "listen address '" + addr + "' lacks ':port'");
  }
  auto host = addr.substr(0, colon);
  auto port_text = addr.substr(colon + 1);
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) throw std::invalid_argument("trailing");
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "bad port in listen address '" + addr + "'");
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::ParseError, "port out of range in '" + addr + "'");
  }
  if (!host.empty()) config.host = host;
  config.port = port;
}

ServiceConfig parse_service_config(const json& j) {
  only_fields(j,
              {"listen", "clusters", "config", "auth_header", "clock", "time_scale",
               "tick_ms", "users", "default_quota", "catalog_path", "bandwidth",
               "provision_delay_ms"},
              "service config");
  ServiceConfig out;
  json cluster_doc = {{"clusters", j.at("clusters")}};
  if (j.contains("config")) cluster_doc["config"] = j.at("config");
  auto cf = parse_cluster_file(cluster_doc);
  out.platform.clusters = cf.clusters;
  out.platform.sim = cf.config;
  if (j.contains("listen")) parse_listen_address(get<std::string>(j, "listen"), out);
  if (j.contains("auth_header")) out.auth_header = get<std::string>(j, "auth_header");
  if (j.contains("clock")) {
    auto mode = get<std::string>(j, "clock");
    if (mode == "simulated") out.clock = ClockMode::Simulated;
    else if (mode == "realtime") out.clock = ClockMode::RealTime;
    else if (mode == "manual") out.clock = ClockMode::Manual;
    else throw Error(ErrorCode::ParseError, "clock must be simulated, realtime or manual");
  }
  if (j.contains("time_scale")) out.time_scale = get<std::int64_t>(j, "time_scale");
  if (j.contains("tick_ms")) out.tick_ms = get<std::int64_t>(j, "tick_ms");
  if (out.time_scale < 1 || out.tick_ms < 1) {
    throw Error(ErrorCode::ParseError, "time_scale and tick_ms must be >= 1");
  }
  if (j.contains("default_quota")) out.platform.default_quota = parse_quota(j.at("default_quota"));
  if (j.contains("users")) {
    for (const auto& u : j.at("users")) {
      only_fields(u, {"user_id", "display_name", "quota"}, "user");
      UserAccount acct;
      acct.user_id = get<std::string>(u, "user_id");
      acct.display_name = u.contains("display_name") ? get<std::string>(u, "display_name")
                                                     : acct.user_id;
      acct.quota = u.contains("quota") ? parse_quota(u.at("quota"))
                                       : out.platform.default_quota;
      out.platform.users.push_back(std::move(acct));
    }
  }
  if (j.contains("catalog_path")) {
    out.platform.catalog_path = get<std::string>(j, "catalog_path");
  }
  if (j.contains("bandwidth")) {
    out.platform.bandwidth = get<std::map<std::string, std::int64_t>>(j, "bandwidth");
  }
  if (j.contains("provision_delay_ms")) {
    out.platform.provision_delay_ms = get<TimeMs>(j, "provision_delay_ms");
  }
  return out;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  auto config = parse_service_config(j);
  // relative catalog paths are relative to the config file
  if (config.platform.catalog_path && config.platform.catalog_path->is_relative()) {
    config.platform.catalog_path = path.parent_path() / *config.platform.catalog_path;
  }
  return config;
}

void apply_env_overrides(ServiceConfig& config) {
  if (const char* addr = std::getenv("HYBRIDSCHED_ADDR"); addr && *addr) {
    parse_listen_address(addr, config);
  }
}

// ---------------------------------------------------------------------------
// Server

Server::Server(ServiceConfig config)
    : config_(std::move(config)),
      platform_(std::make_unique<Platform>(config_.platform)),
      http_(std::make_unique<httplib::Server>()) {
  install_routes();
}

Server::~Server() { stop(); }

namespace {

void send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.text(), "application/json");
}

std::optional<std::string> header(const httplib::Request& req, const std::string& name) {
  if (!req.has_header(name)) return std::nullopt;
  return req.get_header_value(name);
}

}  // namespace

void Server::install_routes() {
  auto& s = *http_;
  const auto auth = config_.auth_header;
  s.Post("/v1/jobs", [this, auth](const httplib::Request& req, httplib::Response& res) {
    auto user = header(req, auth);
    send(res, stream_.call([&] { return platform_->submit_job(user, req.body); }));
  });
  s.Get(R"(/v1/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    send(res, stream_.call([&] { return platform_->job_status(id); }));
  });
  s.Get(R"(/v1/jobs/([^/]+)/result)",
        [this](const httplib::Request& req, httplib::Response& res) {
          std::string id = req.matches[1];
          send(res, stream_.call([&] { return platform_->job_result(id); }));
        });
  s.Delete(R"(/v1/jobs/([^/]+))",
           [this](const httplib::Request& req, httplib::Response& res) {
             std::string id = req.matches[1];
             send(res, stream_.call([&] { return platform_->cancel_job(id); }));
           });
  s.Get("/v1/clusters", [this](const httplib::Request&, httplib::Response& res) {
    send(res, stream_.call([&] { return platform_->list_clusters(); }));
  });
  s.Get("/v1/metrics", [this](const httplib::Request& req, httplib::Response& res) {
    std::optional<std::string> window;
    if (req.has_param("window_ms")) window = req.get_param_value("window_ms");
    send(res, stream_.call([&] { return platform_->metrics(window); }));
  });
  s.Post("/v1/users", [this](const httplib::Request& req, httplib::Response& res) {
    send(res, stream_.call([&] { return platform_->create_user(req.body); }));
  });
  s.Post("/v1/vclusters", [this, auth](const httplib::Request& req, httplib::Response& res) {
    auto user = header(req, auth);
    send(res, stream_.call([&] { return platform_->create_vcluster(user, req.body); }));
  });
  s.Delete(R"(/v1/vclusters/([^/]+))",
           [this](const httplib::Request& req, httplib::Response& res) {
             std::string id = req.matches[1];
             send(res, stream_.call([&] { return platform_->release_vcluster(id); }));
           });
  s.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    json body = {{"error",
                  {{"code", res.status == 404 ? "not_found" : "bad_request"},
                   {"message", req.method + " " + req.path}}}};
    res.set_content(body.dump(), "application/json");
  });
  s.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception& e) {
          message = e.what();
        } catch (...) {
        }
        res.status = 500;
        json body = {{"error", {{"code", "internal"}, {"message", message}}}};
        res.set_content(body.dump(), "application/json");
      });
}

bool Server::bind() {
  if (config_.port == 0) {
    port_ = http_->bind_to_any_port(config_.host);
    return port_ > 0;
  }
  if (!http_->bind_to_port(config_.host, config_.port)) return false;
  port_ = config_.port;
  return true;
}

void Server::serve() {
  running_ = true;
  if (config_.clock != ClockMode::Manual) {
    tick_thread_ = std::thread([this] { tick_loop(); });
  }
  http_->listen_after_bind();
}

bool Server::start() {
  if (!bind()) return false;
  serve_thread_ = std::thread([this] { serve(); });
  http_->wait_until_ready();
  return true;
}

void Server::stop() {
  if (http_) http_->stop();
  if (serve_thread_.joinable()) serve_thread_.join();
  {
    std::lock_guard lock(tick_mu_);
    running_ = false;
  }
  tick_cv_.notify_all();
  if (tick_thread_.joinable()) tick_thread_.join();
  stream_.stop();
}

void Server::advance_to(TimeMs t_ms) {
  stream_.call([&] { platform_->advance_to(t_ms); });
}

void Server::tick_loop() {
  using clock = std::chrono::steady_clock;
  auto scale = config_.clock == ClockMode::RealTime ? 1 : config_.time_scale;
  auto wall_start = clock::now();
  TimeMs virtual_start = stream_.call([&] { return platform_->now(); });
  std::unique_lock lock(tick_mu_);
  while (running_) {
    tick_cv_.wait_for(lock, std::chrono::milliseconds(config_.tick_ms));
    if (!running_) break;
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       clock::now() - wall_start)
                       .count();
    TimeMs target = virtual_start + elapsed * scale;
    lock.unlock();
    try {
      stream_.call([&] { platform_->advance_to(target); });
    } catch (const Error&) {
      // NonTerminating past the horizon: stop advancing, keep serving reads
      lock.lock();
      break;
    }
    lock.lock();
  }
}

}  // namespace hybridsched
