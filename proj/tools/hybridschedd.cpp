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

// hybridschedd: serves the scheduling API over HTTP.

#include <csignal>
#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "hybridsched/server.hpp"

int main(int argc, char** argv) {
  CLI::App app{"HybridSched API server"};
  std::string config_path = "hybridsched.json";
  std::string mode;
  std::string listen;
  app.add_option("-c,--config", config_path, "Service config file")->capture_default_str();
  app.add_option("--clock", mode, "Clock mode")
      ->check(CLI::IsMember({"simulated", "realtime", "manual"}));
  app.add_option("--listen", listen, "host:port, overrides the config file");
  CLI11_PARSE(app, argc, argv);

  hybridsched::ServiceConfig config;
  try {
    config = hybridsched::load_service_config(config_path);
    if (!listen.empty()) hybridsched::parse_listen_address(listen, config);
    hybridsched::apply_env_overrides(config);
    if (mode == "simulated") config.clock = hybridsched::ClockMode::Simulated;
    if (mode == "realtime") config.clock = hybridsched::ClockMode::RealTime;
    if (mode == "manual") config.clock = hybridsched::ClockMode::Manual;
  } catch (const std::exception& e) {
    std::cerr << "hybridschedd: " << e.what() << '\n';
    return 2;
  }

  // Handle termination on this thread; worker threads inherit the mask.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  try {
    hybridsched::Server server(config);
    if (!server.start()) {
      std::cerr << "hybridschedd: cannot listen on " << config.host << ':' << config.port
                << '\n';
      return 1;
    }
    std::cout << "listening on " << config.host << ':' << server.port() << std::endl;
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  } catch (const std::exception& e) {
    std::cerr << "hybridschedd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
