#include "http_client.hpp"

#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "httplib.h"

namespace kite::detail {

HttpTarget split_url(const std::string& url, const char* module) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0) {
    throw Error(ErrorCode::kInvalidArgument, module,
                fmt::format("unsupported URL '{}', expected http://host[:port][/path]", url));
  }
  const auto slash = url.find('/', kScheme.size());
  HttpTarget t;
  if (slash == std::string::npos) {
    t.base = url;
    t.path = "/";
  } else {
    t.base = url.substr(0, slash);
    t.path = url.substr(slash);
  }
  if (t.base.size() == kScheme.size()) {
    throw Error(ErrorCode::kInvalidArgument, module, fmt::format("URL '{}' has no host", url));
  }
  return t;
}

std::string post_json(const std::string& url, const std::string& body, const RetryPolicy& retry,
                      double timeout_s, const char* module, ErrorCode timeout_code) {
  const HttpTarget target = split_url(url, module);
  httplib::Client client(target.base);
  const auto sec = static_cast<time_t>(std::floor(timeout_s));
  const auto usec = static_cast<time_t>((timeout_s - std::floor(timeout_s)) * 1e6);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  std::string last_failure = "no attempt made";
  bool last_was_timeout = false;
  const int attempts = 1 + std::max(0, retry.max_retries);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double wait = retry.initial_backoff_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
    auto res = client.Post(target.path, body, "application/json");
    if (!res) {
      const auto err = res.error();
      last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
      last_failure = httplib::to_string(err);
      continue;
    }
    if (res->status >= 500) {
      last_was_timeout = false;
      last_failure = fmt::format("HTTP {}", res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw Error(ErrorCode::kBackendMalformed, module,
                  fmt::format("{} replied HTTP {}", url, res->status));
    }
    return res->body;
  }
  const ErrorCode code = last_was_timeout ? timeout_code : ErrorCode::kBackendUnreachable;
  throw Error(code, module,
              fmt::format("{} failed after {} attempt(s): {}", url, attempts, last_failure));
}

}  // namespace kite::detail
