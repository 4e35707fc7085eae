// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "percept/attributes.hpp"
#include "percept/captioner.hpp"
#include "percept/dialogue.hpp"
#include "percept/synthesis.hpp"
#include "percept/voice.hpp"

namespace httplib {
class Server;
}

namespace percept {

inline constexpr std::string_view kVersion = "0.3.1";

struct GatewayConfig {
  const ChatBackend* chat = nullptr;
  const TtsBackend* tts = nullptr;
  const CaptionClassifier* classifier = nullptr;
  const VoiceTable* voices = &VoiceTable::builtin();
  const InstructionBank* bank = &InstructionBank::builtin();
  Calibration calibration;
  ProsodyConfig prosody;
  AttributeProfile fallback{Gender::female, Emotion::neutral, Level::neutral, Level::neutral,
                            Level::neutral};
  ResponseMode default_mode = ResponseMode::with_captions;
  std::uint64_t seed = 7;
  std::optional<std::filesystem::path> log_path;    // JSONL session log, replayed on start
  std::optional<std::filesystem::path> static_dir;  // console bundle
  /// URLs probed by /health for remote backends; empty means not probed.
  std::string llm_probe_url;
  std::string tts_probe_url;
};

struct SessionTurn {
  DialogueTurn turn;
  bool agent = false;
  std::string voice_id;
  std::string wav;  // encoded WAV bytes, may be empty
};

struct Session {
  std::string id;
  std::string created_at;  // ISO 8601 UTC
  ResponseMode mode = ResponseMode::with_captions;
  std::uint64_t seed = 7;
  std::vector<SessionTurn> history;  // append-only
  mutable std::mutex mutex;
};

/// HTTP front end holding per-session dialogue state. Requests on one
/// session are serialised; different sessions proceed independently.
class Gateway {
 public:
  explicit Gateway(GatewayConfig config);
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Registers every route on `server`.
  void mount(httplib::Server& server);

  /// Blocking listen on "host:port".
  bool listen(const std::string& bind);
  /// Binds to a free port on `host` and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Splits "host:port" (default port 8080). Throws invalid_argument.
std::pair<std::string, int> parse_bind(std::string_view bind);

/// PERCEPT_BIND or "127.0.0.1:8080".
std::string bind_from_env();

}  // namespace percept
