// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace percept {

/// Failure categories. Every operation that can fail throws `Error` with one of
/// these codes so callers (CLI, gateway, harness) can map them to exit codes
/// and HTTP statuses without string matching.
enum class Errc {
  io,                     // unreadable / unwritable file
  unsupported_encoding,   // WAV format we do not decode
  empty_payload,          // zero-length audio data
  invalid_argument,       // precondition violated by caller
  invariant_violation,    // value breaks a domain-type invariant
  insufficient_data,      // not enough observations for a statistic
  degenerate_distribution,
  unknown_gender,
  parse,                  // malformed text record or LLM reply
  network,                // transport failure after retries
  http_status,            // non-success status from a remote backend
  malformed_response,     // remote body not in the expected wire format
  decode,                 // remote audio not decodable
  not_found,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace percept
