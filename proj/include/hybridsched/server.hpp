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

// HTTP front end. Handlers run on the server's thread pool; each one posts a
// command to a single worker thread that owns the Platform and waits for the
// result, so responses follow one serial history.

#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "hybridsched/service.hpp"

namespace httplib {
class Server;
}

namespace hybridsched {

/// Runs posted closures one at a time on a dedicated thread.
class CommandStream {
 public:
  CommandStream();
  ~CommandStream();
  CommandStream(const CommandStream&) = delete;
  CommandStream& operator=(const CommandStream&) = delete;

  template <typename F>
  auto call(F&& f) -> decltype(f()) {
    using R = decltype(f());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<F>(f));
    auto result = task->get_future();
    post([task] { (*task)(); });
    return result.get();
  }

  void stop();

 private:
  void post(std::function<void()> fn);
  void loop();

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::thread worker_;
};

enum class ClockMode {
  Simulated,  // virtual time advances time_scale ms per wall-clock ms
  RealTime,   // virtual time tracks the wall clock
  Manual,     // virtual time only moves through Server::advance_to
};

struct ServiceConfig {
  PlatformConfig platform;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string auth_header = "X-User-Id";
  ClockMode clock = ClockMode::Simulated;
  std::int64_t time_scale = 100;
  std::int64_t tick_ms = 10;
};

/// Parses a service config file body. Unknown fields are rejected.
ServiceConfig parse_service_config(const nlohmann::json& j);
ServiceConfig load_service_config(const std::filesystem::path& path);
/// Applies HYBRIDSCHED_ADDR ("host:port" or ":port") when set.
void apply_env_overrides(ServiceConfig& config);
/// Splits "host:port"; an empty host keeps the current one.
void parse_listen_address(const std::string& addr, ServiceConfig& config);

class Server {
 public:
  explicit Server(ServiceConfig config);
  ~Server();

  /// Binds the listen socket; port 0 picks a free port. Returns false on
  /// failure.
  bool bind();
  int port() const { return port_; }
  /// Serves until stop(). bind() must have succeeded.
  void serve();
  /// bind() + serve() on a background thread.
  bool start();
  void stop();

  void advance_to(TimeMs t_ms);
  template <typename F>
  auto with_platform(F&& f) {
    return stream_.call([&] { return f(*platform_); });
  }

 private:
  void install_routes();
  void tick_loop();

  ServiceConfig config_;
  std::unique_ptr<Platform> platform_;
  CommandStream stream_;
  std::unique_ptr<httplib::Server> http_;
  int port_ = 0;
  std::thread serve_thread_;
  std::thread tick_thread_;
  std::atomic<bool> running_{false};
  std::mutex tick_mu_;
  std::condition_variable tick_cv_;
};

}  // namespace hybridsched
