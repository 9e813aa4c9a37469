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

#include "dialret/http_server.h"

#include "dialret/error.h"
#include "httplib.h"

namespace dialret {
namespace {

using json = nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  Reply(res, status, json{{"code", code}, {"message", message}});
}

// Runs a handler and maps exceptions to the JSON error contract.
template <typename Fn>
void Guard(httplib::Response& res, Fn&& fn) {
  try {
    Reply(res, 200, fn());
  } catch (const ApiError& e) {
    ReplyError(res, e.status(), e.code(), e.what());
  } catch (const NotFoundError& e) {
    ReplyError(res, 404, "not_found", e.what());
  } catch (const StateError& e) {
    ReplyError(res, 400, "state_error", e.what());
  } catch (const DataError& e) {
    ReplyError(res, 400, "bad_request", e.what());
  } catch (const json::exception& e) {
    ReplyError(res, 400, "bad_request", e.what());
  } catch (const std::exception& e) {
    ReplyError(res, 500, "internal", e.what());
  }
}

json ParseBody(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json body = json::parse(req.body, nullptr, false);
  if (body.is_discarded()) {
    throw ApiError(400, "bad_request", "request body is not valid JSON");
  }
  return body;
}

}  // namespace

HttpServer::HttpServer(SessionService& service,
                       std::filesystem::path static_dir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& svr = *server_;
  svr.Post("/sessions", [this](const httplib::Request& req,
                               httplib::Response& res) {
    Guard(res, [&] { return service_.Create(ParseBody(req)); });
  });
  svr.Get(R"(/sessions/([0-9a-f]+))",
          [this](const httplib::Request& req, httplib::Response& res) {
            Guard(res, [&] { return service_.Get(req.matches[1]); });
          });
  svr.Post(R"(/sessions/([0-9a-f]+)/question)",
           [this](const httplib::Request& req, httplib::Response& res) {
             Guard(res, [&] { return service_.NextQuestion(req.matches[1]); });
           });
  svr.Post(R"(/sessions/([0-9a-f]+)/answer)",
           [this](const httplib::Request& req, httplib::Response& res) {
             Guard(res, [&] {
               const json body = ParseBody(req);
               if (!body.contains("answer") || !body["answer"].is_string()) {
                 throw ApiError(400, "bad_request",
                                "body must be {\"answer\": string}");
               }
               return service_.SubmitAnswer(req.matches[1],
                                            body["answer"].get<std::string>());
             });
           });
  svr.Post(R"(/sessions/([0-9a-f]+)/finish)",
           [this](const httplib::Request& req, httplib::Response& res) {
             Guard(res, [&] { return service_.Finish(req.matches[1]); });
           });
  svr.Get(R"(/sessions/([0-9a-f]+)/candidates)",
          [this](const httplib::Request& req, httplib::Response& res) {
            Guard(res, [&] {
              std::optional<std::size_t> k;
              if (req.has_param("k")) {
                try {
                  k = std::stoul(req.get_param_value("k"));
                } catch (const std::exception&) {
                  throw ApiError(400, "bad_request", "k must be an integer");
                }
              }
              return service_.Candidates(req.matches[1], k);
            });
          });
  if (!static_dir.empty()) svr.set_mount_point("/", static_dir.string());
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw RuntimeFailure("cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw RuntimeFailure("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::Listen() { server_->listen_after_bind(); }

int HttpServer::Start(const std::string& host, int port) {
  const int bound = Bind(host, port);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void HttpServer::Stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace dialret
