/*
 * Copyright 2026 The cxrlabel Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// HTTP front end for the labeling service.

#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"

#include "error.h"
#include "service/service.h"

int main(int argc, char** argv) {
  CLI::App app{"cxrlabel HTTP service"};
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "cxrlabel-data";
  std::size_t quorum = cxrlabel::kDefaultQuorum;
  app.add_option("--host", host, "Address to bind")->capture_default_str();
  app.add_option("--port", port, "Port to listen on")->capture_default_str();
  app.add_option("--data-dir", data_dir, "Directory for events.jsonl and runs/")
      ->capture_default_str();
  app.add_option("--quorum", quorum, "Default reader quorum")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  cxrlabel::service::ServiceOptions options;
  options.data_dir = data_dir;
  options.quorum = quorum;
  if (const char* token = std::getenv("CXRLABEL_SERVICE_TOKEN"); token != nullptr && *token) {
    options.bearer_token = token;
  }
  try {
    cxrlabel::service::Service service(options);
    httplib::Server server;
    service.Register(server);
    std::cerr << "listening on " << host << ":" << port << "\n";
    if (!server.listen(host, port)) {
      std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
      return 1;
    }
  } catch (const cxrlabel::Error& e) {
    std::cerr << "error: " << cxrlabel::ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 2;
  }
  return 0;
}
