// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/prosody.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

#include "percept/error.hpp"

namespace percept {

namespace {

struct LagRange {
  std::size_t min_lag;
  std::size_t max_lag;
};

LagRange lag_range(int sample_rate, const PitchParams& pitch) {
  return {static_cast<std::size_t>(std::floor(sample_rate / pitch.f_max_hz)),
          static_cast<std::size_t>(std::ceil(sample_rate / pitch.f_min_hz))};
}

void check_pitch_request(const AudioClip& clip, const FrameGrid& grid, const PitchParams& pitch) {
  if (pitch.f_min_hz < 40.0 || pitch.f_min_hz >= pitch.f_max_hz ||
      pitch.f_max_hz > clip.sample_rate() / 4.0) {
    throw Error(Errc::invalid_argument, "pitch search band invalid for this sample rate");
  }
  if (clip.duration_s() < 2.0 / pitch.f_min_hz) {
    throw Error(Errc::insufficient_data, "clip shorter than two periods of the lowest pitch");
  }
  if (grid.frame_length <= lag_range(clip.sample_rate(), pitch).max_lag) {
    throw Error(Errc::invalid_argument, "frame too short for the lowest pitch in the band");
  }
}

PitchTrack make_pitch_track(const FrameGrid& grid) {
  PitchTrack track;
  track.grid = grid;
  track.f0_hz.assign(grid.frame_count, 0.0);
  track.voiced.assign(grid.frame_count, false);
  return track;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

namespace kernels {

double yin_frame(std::span<const double> frame, int sample_rate, const PitchParams& pitch,
                 std::vector<double>& d) {
  const auto [min_lag, max_lag] = lag_range(sample_rate, pitch);
  const std::size_t window = frame.size() - max_lag;
  d.assign(max_lag + 1, 0.0);

  // Difference function.
  for (std::size_t tau = 1; tau <= max_lag; ++tau) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < window; ++j) {
      const double diff = frame[j] - frame[j + tau];
      acc += diff * diff;
    }
    d[tau] = acc;
  }
  // Cumulative-mean normalisation, in place.
  d[0] = 1.0;
  double running = 0.0;
  for (std::size_t tau = 1; tau <= max_lag; ++tau) {
    running += d[tau];
    d[tau] = running > 0.0 ? d[tau] * static_cast<double>(tau) / running : 1.0;
  }

  std::size_t tau = std::max<std::size_t>(min_lag, 2);
  for (; tau < max_lag; ++tau) {
    if (d[tau] < pitch.threshold) {
      while (tau + 1 < max_lag && d[tau + 1] < d[tau]) ++tau;
      break;
    }
  }
  if (tau >= max_lag) return 0.0;

  double refined = static_cast<double>(tau);
  const double a = d[tau - 1], b = d[tau], c = d[tau + 1];
  const double denom = a - 2.0 * b + c;
  if (denom > 0.0) refined += 0.5 * (a - c) / denom;

  const double f0 = sample_rate / refined;
  if (f0 < pitch.f_min_hz || f0 > pitch.f_max_hz) return 0.0;
  return f0;
}

}  // namespace kernels

PitchTrack detect_f0(const AudioClip& clip, FrameParams frames, PitchParams pitch) {
  const Frames fr = make_frames(clip, frames);
  check_pitch_request(clip, fr.grid, pitch);
  PitchTrack track = make_pitch_track(fr.grid);
  const auto n = static_cast<long>(fr.grid.frame_count);
  std::vector<double> f0(fr.grid.frame_count, 0.0);
#pragma omp parallel
  {
    std::vector<double> scratch;
#pragma omp for schedule(static)
    for (long i = 0; i < n; ++i) {
      const auto k = static_cast<std::size_t>(i);
      f0[k] = kernels::yin_frame(fr.views[k], clip.sample_rate(), pitch, scratch);
    }
  }
  for (std::size_t i = 0; i < f0.size(); ++i) {
    track.f0_hz[i] = f0[i];
    track.voiced[i] = f0[i] > 0.0;
  }
  return track;
}

PitchTrack detect_f0_serial(const AudioClip& clip, FrameParams frames, PitchParams pitch) {
  const Frames fr = make_frames(clip, frames);
  check_pitch_request(clip, fr.grid, pitch);
  PitchTrack track = make_pitch_track(fr.grid);
  std::vector<double> scratch;
  for (std::size_t i = 0; i < fr.grid.frame_count; ++i) {
    track.f0_hz[i] = kernels::yin_frame(fr.views[i], clip.sample_rate(), pitch, scratch);
    track.voiced[i] = track.f0_hz[i] > 0.0;
  }
  return track;
}

std::vector<double> compute_energy(const AudioClip& clip, FrameParams frames) {
  const Frames fr = make_frames(clip, frames);
  std::vector<double> rms(fr.grid.frame_count, 0.0);
  for (std::size_t i = 0; i < rms.size(); ++i) {
    const auto& v = fr.views[i];
    const double sq = std::inner_product(v.begin(), v.end(), v.begin(), 0.0);
    rms[i] = std::sqrt(sq / static_cast<double>(v.size()));
  }
  return rms;
}

std::size_t count_words(std::string_view text) {
  std::size_t words = 0;
  bool in_word = false;
  for (char c : text) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++words;
    }
  }
  return words;
}

SpeechRate estimate_speech_rate(std::string_view transcript, double duration_s) {
  if (!(duration_s > 0.0)) throw Error(Errc::invalid_argument, "duration must be positive");
  const std::size_t words = count_words(transcript);
  if (words == 0) return {0.0, true};
  return {static_cast<double>(words) / duration_s, false};
}

std::size_t ProsodyTrack::voiced_count() const {
  return static_cast<std::size_t>(std::count(voiced.begin(), voiced.end(), true));
}

void ProsodyTrack::check_invariants(const PitchParams& band) const {
  const std::size_t n = grid.frame_count;
  if (f0_hz.size() != n || voiced.size() != n || rms.size() != n) {
    throw Error(Errc::invariant_violation, "per-frame sequences differ from the frame count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if ((f0_hz[i] > 0.0) != voiced[i]) {
      throw Error(Errc::invariant_violation, "f0/voicing disagree at frame " + std::to_string(i));
    }
    if (voiced[i] && (f0_hz[i] < band.f_min_hz || f0_hz[i] > band.f_max_hz)) {
      throw Error(Errc::invariant_violation, "voiced f0 outside band at frame " + std::to_string(i));
    }
  }
  if (voiced_count() == 0 && mean_f0_hz != 0.0) {
    throw Error(Errc::invariant_violation, "mean f0 must be zero without voiced frames");
  }
}

ProsodyTrack extract_prosody(const AudioClip& clip, std::optional<std::string_view> transcript,
                             const ProsodyConfig& config) {
  PitchTrack pitch = detect_f0(clip, config.frames, config.pitch);
  ProsodyTrack track;
  track.grid = pitch.grid;
  track.f0_hz = std::move(pitch.f0_hz);
  track.voiced = std::move(pitch.voiced);
  track.rms = compute_energy(clip, config.frames);
  track.duration_s = clip.duration_s();

  double sum = 0.0, sum_sq = 0.0;
  std::size_t voiced = 0;
  for (std::size_t i = 0; i < track.f0_hz.size(); ++i) {
    if (!track.voiced[i]) continue;
    sum += track.f0_hz[i];
    sum_sq += track.f0_hz[i] * track.f0_hz[i];
    ++voiced;
  }
  if (voiced > 0) {
    track.mean_f0_hz = sum / static_cast<double>(voiced);
    const double var = sum_sq / static_cast<double>(voiced) - track.mean_f0_hz * track.mean_f0_hz;
    track.f0_std_hz = std::sqrt(std::max(0.0, var));
  }
  if (!track.rms.empty()) {
    track.mean_rms = std::accumulate(track.rms.begin(), track.rms.end(), 0.0) /
                     static_cast<double>(track.rms.size());
  }
  if (transcript) {
    const SpeechRate rate = estimate_speech_rate(*transcript, track.duration_s);
    track.speech_rate_wps = rate.words_per_second;
    track.rate_low_confidence = rate.low_confidence;
  }
  return track;
}

}  // namespace percept
