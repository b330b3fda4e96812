// Copyright 2026 The DeceptForge Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DECEPTFORGE_WIRE_HPP_
#define DECEPTFORGE_WIRE_HPP_

// JSON-over-HTTP protocol for victim and scorer backends:
//
//   POST /v1/score     {"prompt", "continuation"}
//                      -> {"tokens": [{"text", "start", "end", "logprob"}]}
//   POST /v1/generate  {"prompt", "n", "max_tokens", "temperature", "top_p",
//                       "top_k": int|null, "seed": int|null}
//                      -> {"completions": [str]}
//
// Errors come back as a non-200 status with {"error": str, "kind": str}.

#include <chrono>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "deceptforge/errors.hpp"
#include "deceptforge/model_client.hpp"
#include "deceptforge/scored.hpp"
#include "httplib.h"
#include "json.hpp"

namespace deceptforge::wire {

using nlohmann::json;

inline json ScoreRequest(std::string_view prompt, std::string_view continuation) {
  return {{"prompt", prompt}, {"continuation", continuation}};
}

inline json ScoreResponse(const ScoredContinuation& sc) {
  json tokens = json::array();
  for (const auto& t : sc.tokens) {
    tokens.push_back(
        {{"text", t.text}, {"start", t.start}, {"end", t.end}, {"logprob", t.logprob}});
  }
  return {{"tokens", std::move(tokens)}};
}

inline ScoredContinuation ParseScoreResponse(const json& j,
                                             std::string_view continuation) {
  ScoredContinuation sc;
  sc.continuation_text = std::string(continuation);
  try {
    for (const auto& t : j.at("tokens")) {
      sc.tokens.push_back({t.at("text").get<std::string>(),
                           t.at("start").get<size_t>(), t.at("end").get<size_t>(),
                           t.at("logprob").get<double>()});
    }
  } catch (const json::exception& e) {
    throw TransportError(std::string("malformed score response: ") + e.what());
  }
  if (auto problem = CheckScoredContinuation(sc); !problem.empty()) {
    throw TransportError("score response does not tile the continuation: " +
                         problem);
  }
  return sc;
}

inline json GenerateRequest(std::string_view prompt, const SamplingParams& p) {
  return {{"prompt", prompt},
          {"n", p.n},
          {"max_tokens", p.max_tokens},
          {"temperature", p.temperature},
          {"top_p", p.top_p},
          {"top_k", p.top_k ? json(*p.top_k) : json(nullptr)},
          {"seed", p.seed ? json(*p.seed) : json(nullptr)}};
}

inline SamplingParams ParseGenerateParams(const json& j) {
  // Omitted fields take the SamplingParams defaults.
  SamplingParams p;
  p.n = j.value("n", p.n);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.temperature = j.value("temperature", p.temperature);
  p.top_p = j.value("top_p", p.top_p);
  if (j.contains("top_k") && !j["top_k"].is_null()) p.top_k = j["top_k"].get<int>();
  if (j.contains("seed") && !j["seed"].is_null()) p.seed = j["seed"].get<uint64_t>();
  p.Validate();
  return p;
}

inline json ErrorBody(std::string_view kind, std::string_view message) {
  return {{"error", message}, {"kind", kind}};
}

[[noreturn]] inline void RethrowRemote(int status, const std::string& body) {
  std::string kind, message = body;
  try {
    auto j = json::parse(body);
    kind = j.value("kind", "");
    message = j.value("error", body);
  } catch (const json::exception&) {
  }
  if (kind == "TokenizationError") throw TokenizationError(message);
  if (kind == "EmptyText") throw EmptyText(message);
  if (kind == "ConfigError") throw ConfigError(message);
  throw TransportError("backend returned HTTP " + std::to_string(status) +
                       ": " + message);
}

// Client for a remote backend speaking the protocol above. Opens a fresh
// connection per call, so one instance can serve many threads.
class HttpModelClient : public ModelClient {
 public:
  explicit HttpModelClient(std::string base_url, int timeout_seconds = 120)
      : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {
    while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
    if (base_url_.rfind("http://", 0) != 0 && base_url_.rfind("https://", 0) != 0) {
      throw ConfigError("backend URL must start with http:// or https://: " +
                        base_url_);
    }
  }

  ScoredContinuation Score(std::string_view prompt,
                           std::string_view continuation) override {
    if (prompt.empty() || continuation.empty()) {
      throw EmptyText("score needs a non-empty prompt and continuation");
    }
    auto body = Post("/v1/score", ScoreRequest(prompt, continuation));
    return ParseScoreResponse(body, continuation);
  }

  std::vector<std::string> Generate(std::string_view prompt,
                                    const SamplingParams& params) override {
    params.Validate();
    auto body = Post("/v1/generate", GenerateRequest(prompt, params));
    try {
      auto out = body.at("completions").get<std::vector<std::string>>();
      if (out.size() != static_cast<size_t>(params.n)) {
        throw TransportError("backend returned " + std::to_string(out.size()) +
                             " completions, wanted " + std::to_string(params.n));
      }
      return out;
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed generate response: ") + e.what());
    }
  }

  const std::string& base_url() const { return base_url_; }

 private:
  json Post(const std::string& path, const json& request) {
    // Split "scheme://host:port/prefix" so a path prefix survives.
    const auto scheme_end = base_url_.find("://") + 3;
    const auto slash = base_url_.find('/', scheme_end);
    const std::string origin = base_url_.substr(0, slash);
    const std::string prefix =
        slash == std::string::npos ? "" : base_url_.substr(slash);
    httplib::Client cli(origin);
    cli.set_connection_timeout(timeout_seconds_, 0);
    cli.set_read_timeout(timeout_seconds_, 0);
    cli.set_write_timeout(timeout_seconds_, 0);
    auto res = cli.Post(prefix + path, request.dump(), "application/json");
    if (!res) {
      throw TransportError("cannot reach " + base_url_ + path + ": " +
                           httplib::to_string(res.error()));
    }
    if (res->status != 200) RethrowRemote(res->status, res->body);
    try {
      return json::parse(res->body);
    } catch (const json::exception& e) {
      throw TransportError(std::string("backend sent invalid JSON: ") + e.what());
    }
  }

  std::string base_url_;
  int timeout_seconds_;
};

// Serves any ModelClient over the protocol. Used by `toy-serve` and tests.
class ModelServer {
 public:
  explicit ModelServer(ModelClient& model) : model_(model) {
    server_.Post("/v1/score", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      Handle(res, [&] {
        auto j = json::parse(req.body);
        auto prompt = j.at("prompt").get<std::string>();
        auto continuation = j.at("continuation").get<std::string>();
        return ScoreResponse(model_.Score(prompt, continuation));
      });
    });
    server_.Post("/v1/generate", [this](const httplib::Request& req,
                                        httplib::Response& res) {
      Handle(res, [&] {
        auto j = json::parse(req.body);
        auto prompt = j.at("prompt").get<std::string>();
        auto params = ParseGenerateParams(j);
        return json{{"completions", model_.Generate(prompt, params)}};
      });
    });
  }

  ~ModelServer() { Stop(); }
  ModelServer(const ModelServer&) = delete;
  ModelServer& operator=(const ModelServer&) = delete;

  // Blocks until Stop().
  bool Listen(const std::string& host, int port) {
    return server_.listen(host, port);
  }

  // Binds an ephemeral port and serves from a background thread.
  int StartInBackground(const std::string& host = "127.0.0.1") {
    const int port = server_.bind_to_any_port(host);
    if (port < 0) throw TransportError("cannot bind " + host);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void Stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  template <typename F>
  static void Handle(httplib::Response& res, F&& body) {
    auto reply = [&](int status, const json& j) {
      res.status = status;
      res.set_content(j.dump(), "application/json");
    };
    try {
      reply(200, body());
    } catch (const json::exception& e) {
      reply(400, ErrorBody("ConfigError", e.what()));
    } catch (const TokenizationError& e) {
      reply(422, ErrorBody("TokenizationError", e.what()));
    } catch (const EmptyText& e) {
      reply(422, ErrorBody("EmptyText", e.what()));
    } catch (const ConfigError& e) {
      reply(400, ErrorBody("ConfigError", e.what()));
    } catch (const std::exception& e) {
      reply(500, ErrorBody("Error", e.what()));
    }
  }

  ModelClient& model_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace deceptforge::wire

#endif  // DECEPTFORGE_WIRE_HPP_
