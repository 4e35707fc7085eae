// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "percept/audio.hpp"

namespace percept {

struct PitchParams {
  double f_min_hz = 60.0;
  double f_max_hz = 500.0;
  double threshold = 0.15;  // YIN aperiodicity threshold
};

struct ProsodyConfig {
  FrameParams frames;
  PitchParams pitch;
};

struct PitchTrack {
  FrameGrid grid;
  std::vector<double> f0_hz;  // 0 where unvoiced
  std::vector<bool> voiced;
};

struct SpeechRate {
  double words_per_second = 0.0;
  bool low_confidence = false;
};

/// Per-frame acoustic evidence plus utterance statistics.
///
/// Invariants: f0_hz[i] > 0 exactly when voiced[i]; all per-frame vectors have
/// grid.frame_count entries; voiced f0 lies in the configured search band;
/// mean_f0_hz is 0 when nothing is voiced. Use `check_invariants` in tests.
struct ProsodyTrack {
  FrameGrid grid;
  std::vector<double> f0_hz;
  std::vector<bool> voiced;
  std::vector<double> rms;
  double mean_f0_hz = 0.0;
  double f0_std_hz = 0.0;
  double mean_rms = 0.0;
  double duration_s = 0.0;
  std::optional<double> speech_rate_wps;
  bool rate_low_confidence = false;

  std::size_t voiced_count() const;
  /// Throws invariant_violation describing the first broken invariant.
  void check_invariants(const PitchParams& band) const;
};

PitchTrack detect_f0(const AudioClip& clip, FrameParams frames, PitchParams pitch);
/// Serial reference for `detect_f0`; produces bit-identical output.
PitchTrack detect_f0_serial(const AudioClip& clip, FrameParams frames, PitchParams pitch);

std::vector<double> compute_energy(const AudioClip& clip, FrameParams frames);

SpeechRate estimate_speech_rate(std::string_view transcript, double duration_s);
std::size_t count_words(std::string_view text);

ProsodyTrack extract_prosody(const AudioClip& clip, std::optional<std::string_view> transcript,
                             const ProsodyConfig& config = {});

namespace kernels {

/// YIN estimate for one frame. Returns 0 when no lag dips below the threshold
/// or the refined frequency leaves the search band.
double yin_frame(std::span<const double> frame, int sample_rate, const PitchParams& pitch,
                 std::vector<double>& scratch);

}  // namespace kernels

}  // namespace percept
