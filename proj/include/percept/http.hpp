// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <map>
#include <string>
#include <string_view>

namespace percept::http {

struct Url {
  std::string scheme_host_port;  // "http://host:8080"
  std::string path;              // "/v1/chat/completions", never empty
};

/// Splits an absolute http(s) URL. Throws invalid_argument otherwise.
Url parse_url(std::string_view url);

struct RetryPolicy {
  int retries = 2;
  std::chrono::milliseconds initial_backoff{200};
  double timeout_s = 30.0;
};

struct Response {
  int status = 0;
  std::string body;
  std::string content_type;
};

/// POST with exponential backoff. Transport failures, 429 and 5xx are retried
/// up to `policy.retries` extra attempts. Throws Error(network) when the last
/// attempt failed in transport and Error(http_status) for a final non-2xx.
Response post_with_retry(const std::string& url, const std::string& body,
                         const std::string& content_type,
                         const std::map<std::string, std::string>& headers,
                         const RetryPolicy& policy);

/// Single GET without retries; returns status 0 on transport failure.
Response get_once(const std::string& url, double timeout_s);

}  // namespace percept::http
