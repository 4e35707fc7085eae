// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/error.hpp"

namespace percept {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::unsupported_encoding: return "unsupported_encoding";
    case Errc::empty_payload: return "empty_payload";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::invariant_violation: return "invariant_violation";
    case Errc::insufficient_data: return "insufficient_data";
    case Errc::degenerate_distribution: return "degenerate_distribution";
    case Errc::unknown_gender: return "unknown_gender";
    case Errc::parse: return "parse";
    case Errc::network: return "network";
    case Errc::http_status: return "http_status";
    case Errc::malformed_response: return "malformed_response";
    case Errc::decode: return "decode";
    case Errc::not_found: return "not_found";
  }
  return "unknown";
}

}  // namespace percept
