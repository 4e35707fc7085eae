// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <string_view>

#include "percept/attributes.hpp"
#include "percept/audio.hpp"
#include "percept/dialogue.hpp"
#include "percept/http.hpp"
#include "percept/voice.hpp"

namespace percept {

struct SynthesisDirective {
  double pitch_scale = 1.0;  // [0.5, 2.0]
  double time_scale = 1.0;   // output / input duration, [0.5, 2.0]
  double gain_db = 0.0;      // [-12, 12]
  Emotion emotion_preset = Emotion::neutral;

  void validate() const;
};

struct ProsodyDelta {
  double pitch = 1.0;
  double time = 1.0;
  double gain_db = 0.0;
};

/// Level and emotion lookups behind `directive_from_profile`.
struct DirectiveTable {
  std::array<double, 3> pitch_scale{0.8, 1.0, 1.25};
  std::array<double, 3> time_scale{1.25, 1.0, 0.8};
  std::array<double, 3> gain_db{-6.0, 0.0, 6.0};
  // neutral, happy, sad, angry, surprise, fear, disgust
  std::array<ProsodyDelta, 7> emotion{{{1.0, 1.0, 0.0},
                                       {1.1, 0.95, 2.0},
                                       {0.9, 1.1, -2.0},
                                       {1.05, 0.95, 3.0},
                                       {1.1, 0.95, 1.0},
                                       {1.05, 1.05, -1.0},
                                       {0.95, 1.05, -1.0}}};

  static const DirectiveTable& builtin();
};

SynthesisDirective directive_from_profile(const AttributeProfile& profile,
                                          const DirectiveTable& table = DirectiveTable::builtin());

struct WsolaParams {
  double frame_s = 0.032;
  double tolerance_s = 0.010;  // search radius; at least half the longest period
};

/// Waveform-similarity overlap-add. Output length is round(n * factor).
AudioClip time_stretch(const AudioClip& clip, double factor, const WsolaParams& params = {});
/// Resample by 1/factor, then time-stretch by factor. Length is preserved.
AudioClip pitch_shift(const AudioClip& clip, double factor, const WsolaParams& params = {});
/// Linear gain followed by a tanh limiter that engages only above |0.99|.
AudioClip apply_gain(const AudioClip& clip, double gain_db);

inline constexpr int kMockTtsRate = 16000;
inline constexpr double kDefaultSpeakingRate = 2.5;  // words per second

/// Deterministic placeholder voice: one harmonic-complex syllable per word.
AudioClip mock_tts(std::string_view content, const VoiceSpec& voice,
                   double rate_wps = kDefaultSpeakingRate);

struct TtsConfig {
  std::string endpoint;
  std::string api_key;
  int retries = 1;
  double timeout_s = 30.0;
  std::chrono::milliseconds initial_backoff{200};

  /// Reads PERCEPT_TTS_ENDPOINT.
  static TtsConfig from_env();
};

/// POSTs {"text", "voice", "base_f0_hz"} and decodes the WAV reply.
AudioClip remote_tts(std::string_view content, const VoiceSpec& voice, const TtsConfig& config);

class TtsBackend {
 public:
  virtual ~TtsBackend() = default;
  virtual AudioClip speak(std::string_view content, const VoiceSpec& voice) const = 0;
  virtual std::string name() const = 0;
};

class MockTtsBackend final : public TtsBackend {
 public:
  explicit MockTtsBackend(double rate_wps = kDefaultSpeakingRate) : rate_(rate_wps) {}
  AudioClip speak(std::string_view content, const VoiceSpec& voice) const override {
    return mock_tts(content, voice, rate_);
  }
  std::string name() const override { return "mock"; }

 private:
  double rate_;
};

class RemoteTtsBackend final : public TtsBackend {
 public:
  explicit RemoteTtsBackend(TtsConfig config) : config_(std::move(config)) {}
  AudioClip speak(std::string_view content, const VoiceSpec& voice) const override {
    return remote_tts(content, voice, config_);
  }
  std::string name() const override { return "remote"; }

 private:
  TtsConfig config_;
};

/// Applies a directive to a base rendering: time, then pitch, then gain.
AudioClip render_directive(const AudioClip& base, const SynthesisDirective& d);

AudioClip synthesize(const ResponsePlan& plan, const VoiceTable& voices, const TtsBackend& backend,
                     const DirectiveTable& table = DirectiveTable::builtin());

}  // namespace percept
