// Copyright 2026 The Dialret Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIALRET_HTTP_SERVER_H_
#define DIALRET_HTTP_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "dialret/session_service.h"

namespace httplib {
class Server;
}

namespace dialret {

// HTTP+JSON front end for SessionService:
//   POST /sessions                 GET  /sessions/{id}
//   POST /sessions/{id}/question   POST /sessions/{id}/answer
//   POST /sessions/{id}/finish     GET  /sessions/{id}/candidates?k=
// Errors are {"code", "message"} with 400 for state/validation errors and
// 404 for unknown sessions. A static UI bundle may be mounted at "/".
class HttpServer {
 public:
  HttpServer(SessionService& service, std::filesystem::path static_dir = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds to host:port (port 0 picks a free port) and returns the bound port.
  int Bind(const std::string& host, int port);
  // Serves on the calling thread until Stop().
  void Listen();
  // Binds and serves on a background thread.
  int Start(const std::string& host, int port);
  void Stop();

 private:
  SessionService& service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace dialret

#endif  // DIALRET_HTTP_SERVER_H_
