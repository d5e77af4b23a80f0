#include "http.hpp"

#include <cstdlib>
#include <optional>

#include "httplib.h"
#include "vmmr/error.hpp"

namespace vmmr {

RequestLimiter::RequestLimiter(std::size_t max_in_flight)
    : capacity_(max_in_flight == 0 ? 1 : max_in_flight) {}

RequestLimiter::Permit RequestLimiter::acquire() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [&] { return in_flight_ < capacity_; });
  ++in_flight_;
  if (in_flight_ > peak_) peak_ = in_flight_;
  return Permit(*this);
}

void RequestLimiter::release() {
  {
    std::lock_guard lock(mu_);
    --in_flight_;
  }
  cv_.notify_one();
}

RequestLimiter::Permit::~Permit() {
  if (owner_) owner_->release();
}

std::size_t RequestLimiter::in_flight() const {
  std::lock_guard lock(mu_);
  return in_flight_;
}

std::size_t RequestLimiter::peak_in_flight() const {
  std::lock_guard lock(mu_);
  return peak_;
}

namespace http {

Endpoint parse_endpoint(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos || scheme_end == 0) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint url needs a scheme: " + std::string(url));
  }
  const auto host_start = scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  Endpoint ep;
  ep.origin = std::string(url.substr(0, path_start));
  if (ep.origin.size() <= host_start) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint url has no host: " + std::string(url));
  }
  if (path_start != std::string_view::npos) {
    ep.path_prefix = std::string(url.substr(path_start));
    while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  }
  return ep;
}

namespace {

std::string post_once(const PostRequest& request, const Endpoint& ep) {
  httplib::Client client(ep.origin);
  const auto seconds = request.timeout_ms / 1000;
  const auto micros = (request.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (!request.api_key_env_var.empty()) {
    if (const char* key = std::getenv(request.api_key_env_var.c_str()); key && *key) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  const std::string target = ep.path_prefix + request.path;
  auto res = client.Post(target, headers, request.body, "application/json");
  if (!res) {
    throw Error(ErrorCode::kBackendUnreachable,
                "POST " + ep.origin + target + ": " + httplib::to_string(res.error()));
  }
  if (res->status == 429 || res->status >= 500) {
    throw Error(ErrorCode::kBackendUnreachable,
                "POST " + ep.origin + target + ": HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kBackendProtocolError,
                "POST " + ep.origin + target + ": HTTP " + std::to_string(res->status));
  }
  return std::move(res->body);
}

}  // namespace

std::string post_json(const PostRequest& request, RequestLimiter* limiter) {
  const Endpoint ep = parse_endpoint(request.endpoint_url);
  for (int attempt = 0;; ++attempt) {
    std::optional<RequestLimiter::Permit> permit;
    if (limiter) permit.emplace(limiter->acquire());
    try {
      return post_once(request, ep);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendUnreachable || attempt >= 1) throw;
    }
  }
}

}  // namespace http
}  // namespace vmmr
