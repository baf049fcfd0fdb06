#pragma once

#include <string>

#include "kite/backend.hpp"
#include "kite/error.hpp"

namespace kite::detail {

struct HttpTarget {
  std::string base;  // scheme://host[:port]
  std::string path;  // starts with '/'
};

/// Only plain http:// URLs are supported. Errors: kInvalidArgument.
HttpTarget split_url(const std::string& url, const char* module);

/// POSTs a JSON body and returns the response body of a 2xx reply.
/// Transport errors and 5xx replies are retried per `retry`; when retries
/// are exhausted the error is kBackendUnreachable, or `timeout_code` if the
/// last failure was a timeout. Other non-2xx replies raise kBackendMalformed.
std::string post_json(const std::string& url, const std::string& body, const RetryPolicy& retry,
                      double timeout_s, const char* module,
                      ErrorCode timeout_code = ErrorCode::kBackendUnreachable);

}  // namespace kite::detail
