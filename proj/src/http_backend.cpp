// SPDX-License-Identifier: Apache-2.0

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include <nlohmann/json.hpp>

#include "augmincer/scoring.hpp"

namespace augmincer::scoring {

HttpBackend::HttpBackend(HttpConfig config) : config_(std::move(config)) {
  const auto scheme_end = config_.endpoint.find("://");
  if (scheme_end == std::string::npos) throw ValidationError("scoring endpoint must be an http(s) URL: " + config_.endpoint);
  const auto path_start = config_.endpoint.find('/', scheme_end + 3);
  scheme_host_port_ = config_.endpoint.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.endpoint.substr(path_start);
}

std::string HttpBackend::name() const { return "http:" + config_.model; }

std::string HttpBackend::score(const ScoreRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout_seconds);
  client.set_read_timeout(config_.timeout_seconds);

  httplib::Headers headers;
  if (!config_.auth_env.empty()) {
    const char* key = std::getenv(config_.auth_env.c_str());
    if (key == nullptr) throw ValidationError("environment variable " + config_.auth_env + " is not set");
    headers.emplace(config_.auth_header, config_.auth_prefix + key);
  }
  const nlohmann::json body = {{"model", config_.model}, {"prompt", request.prompt_text}, {"task_id", request.task_id}};
  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw TransportError("POST " + config_.endpoint + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("POST " + config_.endpoint + " returned HTTP " + std::to_string(res->status));

  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw TransportError("reply from " + config_.endpoint + " is not JSON");
  const nlohmann::json::json_pointer ptr(config_.response_pointer);
  if (!reply.contains(ptr) || !reply.at(ptr).is_string())
    throw TransportError("reply lacks a string at " + config_.response_pointer);
  return reply.at(ptr).get<std::string>();
}

}  // namespace augmincer::scoring
