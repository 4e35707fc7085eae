// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/http.hpp"

#include <httplib.h>

#include <thread>

#include "percept/error.hpp"

namespace percept::http {

namespace {

httplib::Client make_client(const Url& url, double timeout_s) {
  httplib::Client client(url.scheme_host_port);
  const auto secs = static_cast<time_t>(timeout_s);
  const auto usecs = static_cast<time_t>((timeout_s - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  return client;
}

bool transient(int status) { return status == 429 || status >= 500; }

}  // namespace

Url parse_url(std::string_view url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(Errc::invalid_argument, "URL must be absolute: " + std::string(url));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(Errc::invalid_argument, "unsupported URL scheme: " + std::string(scheme));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  Url out;
  out.scheme_host_port = std::string(url.substr(0, path_start));
  out.path = path_start == std::string_view::npos ? "/" : std::string(url.substr(path_start));
  if (out.scheme_host_port.size() == scheme_end + 3) {
    throw Error(Errc::invalid_argument, "URL has no host: " + std::string(url));
  }
  return out;
}

Response post_with_retry(const std::string& url, const std::string& body,
                         const std::string& content_type,
                         const std::map<std::string, std::string>& headers,
                         const RetryPolicy& policy) {
  const Url target = parse_url(url);
  httplib::Headers hdrs;
  for (const auto& [k, v] : headers) hdrs.emplace(k, v);

  auto backoff = policy.initial_backoff;
  std::string last_failure;
  bool last_was_transport = false;
  int last_status = 0;
  for (int attempt = 0; attempt <= policy.retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto client = make_client(target, policy.timeout_s);
    auto res = client.Post(target.path, hdrs, body, content_type);
    if (!res) {
      last_was_transport = true;
      last_failure = httplib::to_string(res.error());
      continue;
    }
    last_was_transport = false;
    last_status = res->status;
    if (res->status >= 200 && res->status < 300) {
      return {res->status, res->body, res->get_header_value("Content-Type")};
    }
    last_failure = res->body;
    if (!transient(res->status)) break;
  }
  const std::string attempts = std::to_string(policy.retries + 1);
  if (last_was_transport) {
    throw Error(Errc::network,
                url + " unreachable after " + attempts + " attempt(s): " + last_failure);
  }
  throw Error(Errc::http_status, url + " returned status " + std::to_string(last_status) +
                                     " (retries exhausted or not retryable): " + last_failure);
}

Response get_once(const std::string& url, double timeout_s) {
  const Url target = parse_url(url);
  auto client = make_client(target, timeout_s);
  auto res = client.Get(target.path);
  if (!res) return {};
  return {res->status, res->body, res->get_header_value("Content-Type")};
}

}  // namespace percept::http
