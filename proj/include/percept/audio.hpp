// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace percept {

inline constexpr int kMinSampleRate = 8000;
inline constexpr int kMaxSampleRate = 192000;

/// Mono waveform. Samples are nominally in [-1, 1]; construction enforces
/// finiteness and the sample-rate range, `validate_range()` additionally
/// enforces the amplitude bound (required before writing PCM16).
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<double> samples, int sample_rate_hz);

  const std::vector<double>& samples() const noexcept { return samples_; }
  int sample_rate() const noexcept { return sample_rate_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return sample_rate_ > 0 ? static_cast<double>(samples_.size()) / sample_rate_ : 0.0;
  }

  /// Throws invariant_violation if any |sample| > 1.
  void validate_range() const;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 16000;
};

struct FrameGrid {
  double frame_length_s = 0.0;
  double hop_s = 0.0;
  std::size_t frame_count = 0;
  // Derived sample counts at the clip's rate.
  std::size_t frame_length = 0;
  std::size_t hop = 0;
};

struct FrameParams {
  double frame_length_s = 0.040;
  double hop_s = 0.010;
};

/// Frame layout plus read-only views into the clip. The views borrow from the
/// clip passed to `make_frames`, which must outlive them.
struct Frames {
  FrameGrid grid;
  std::vector<std::span<const double>> views;
};

/// Grid arithmetic only (no views). Partial trailing frames are dropped.
FrameGrid frame_grid(std::size_t sample_count, int sample_rate, FrameParams params);
Frames make_frames(const AudioClip& clip, FrameParams params);

AudioClip load_audio(const std::filesystem::path& path);
void save_audio(const AudioClip& clip, const std::filesystem::path& path);

/// In-memory WAV codec used by the file functions and the HTTP surfaces.
AudioClip decode_wav(std::span<const unsigned char> bytes);
std::vector<unsigned char> encode_wav(const AudioClip& clip);

/// Band-limited resampling to an integer target rate.
AudioClip resample(const AudioClip& clip, int target_rate_hz);

namespace kernels {

inline constexpr int kSincHalfTaps = 16;  // taps on each side of the centre

/// Resample `in` by `ratio` (= output rate / input rate); output length is
/// round(in.size() * ratio). Windowed-sinc with a Kaiser window, cutoff at the
/// lower of the two Nyquist rates.
std::vector<double> resample_ratio(std::span<const double> in, double ratio);
std::vector<double> resample_ratio_serial(std::span<const double> in, double ratio);

}  // namespace kernels

}  // namespace percept
