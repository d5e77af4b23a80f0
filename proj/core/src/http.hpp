#pragma once

#include <string>
#include <string_view>

#include "vmmr/limiter.hpp"

namespace vmmr::http {

struct Endpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // "" or "/prefix" without trailing slash
};

// Throws Error(kInvalidConfig) for a URL without scheme or host.
Endpoint parse_endpoint(std::string_view url);

struct PostRequest {
  std::string endpoint_url;
  std::string path;  // appended to the endpoint's prefix, e.g. "/v1/embeddings"
  std::string body;
  std::string api_key_env_var;
  int timeout_ms = 30000;
};

// POSTs a JSON body and returns the 200 response body. Transport failures,
// 429 and 5xx become kBackendUnreachable and are retried once; every other
// non-200 status is kBackendProtocolError.
std::string post_json(const PostRequest& request, RequestLimiter* limiter);

}  // namespace vmmr::http
