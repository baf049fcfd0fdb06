#pragma once

namespace kite {

enum class BackendKind { kHttp, kDirectory, kMock };

/// Transport failures and 5xx responses are retried with exponential backoff.
struct RetryPolicy {
  int max_retries = 2;
  double initial_backoff_s = 0.5;  // doubles after each failed attempt
};

}  // namespace kite
