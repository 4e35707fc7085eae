// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/audio.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <optional>
#include <string>

#include "percept/error.hpp"

namespace percept {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const unsigned char> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

bool tag_is(std::span<const unsigned char> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
};

// Zeroth-order-Bessel Kaiser window sampled on [0, 1]; looked up with linear
// interpolation so the sinc kernel does not evaluate Bessel functions per tap.
class KaiserTable {
 public:
  static constexpr double kBeta = 8.6;
  static constexpr std::size_t kSize = 4096;

  KaiserTable() {
    const double norm = std::cyl_bessel_i(0.0, kBeta);
    for (std::size_t i = 0; i <= kSize; ++i) {
      const double x = static_cast<double>(i) / kSize;
      table_[i] = std::cyl_bessel_i(0.0, kBeta * std::sqrt(std::max(0.0, 1.0 - x * x))) / norm;
    }
  }

  // |x| in units of the window half-width.
  double operator()(double x) const {
    x = std::abs(x);
    if (x >= 1.0) return 0.0;
    const double pos = x * kSize;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  std::array<double, kSize + 1> table_{};
};

const KaiserTable& kaiser() {
  static const KaiserTable table;
  return table;
}

struct SincKernel {
  double cutoff;      // normalised to the input Nyquist
  double half_width;  // in input samples
};

SincKernel kernel_for(double ratio) {
  const double cutoff = std::min(1.0, ratio) * 0.95;
  return {cutoff, kernels::kSincHalfTaps / cutoff};
}

double interpolate_at(std::span<const double> in, double t, const SincKernel& k) {
  const auto lo = static_cast<long>(std::ceil(t - k.half_width));
  const auto hi = static_cast<long>(std::floor(t + k.half_width));
  const long first = std::max(lo, 0L);
  const long last = std::min(hi, static_cast<long>(in.size()) - 1);
  if (first > last) return 0.0;
  const auto& window = kaiser();
  // sin(arg) is stepped by a fixed rotation instead of calling sin per tap.
  const double step = std::numbers::pi * k.cutoff;
  const double sin_step = std::sin(step);
  const double cos_step = std::cos(step);
  double arg = step * (t - static_cast<double>(first));
  double s = std::sin(arg);
  double c = std::cos(arg);
  double acc = 0.0;
  for (long j = first; j <= last; ++j) {
    const double x = t - static_cast<double>(j);
    const double sinc = std::abs(arg) < 1e-9 ? 1.0 : s / arg;
    acc += in[static_cast<std::size_t>(j)] * k.cutoff * sinc * window(x / k.half_width);
    const double s_next = s * cos_step - c * sin_step;
    c = c * cos_step + s * sin_step;
    s = s_next;
    arg -= step;
  }
  return acc;
}

std::size_t resampled_length(std::size_t n, double ratio) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratio));
}

void check_ratio(double ratio) {
  if (!(ratio > 0.0) || !std::isfinite(ratio)) {
    throw Error(Errc::invalid_argument, "resample ratio must be positive and finite");
  }
}

}  // namespace

AudioClip::AudioClip(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_(sample_rate_hz) {
  if (sample_rate_hz < kMinSampleRate || sample_rate_hz > kMaxSampleRate) {
    throw Error(Errc::invariant_violation,
                "sample rate " + std::to_string(sample_rate_hz) + " Hz outside [8000, 192000]");
  }
  for (double s : samples_) {
    if (!std::isfinite(s)) throw Error(Errc::invariant_violation, "non-finite sample");
  }
}

void AudioClip::validate_range() const {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (std::abs(samples_[i]) > 1.0) {
      throw Error(Errc::invariant_violation,
                  "sample " + std::to_string(i) + " has magnitude above 1.0");
    }
  }
}

FrameGrid frame_grid(std::size_t sample_count, int sample_rate, FrameParams params) {
  if (!(params.hop_s > 0.0)) throw Error(Errc::invalid_argument, "hop must be positive");
  if (params.frame_length_s < params.hop_s) {
    throw Error(Errc::invalid_argument, "frame length must be at least the hop");
  }
  FrameGrid grid;
  grid.frame_length_s = params.frame_length_s;
  grid.hop_s = params.hop_s;
  grid.frame_length = static_cast<std::size_t>(std::llround(params.frame_length_s * sample_rate));
  grid.hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(params.hop_s * sample_rate)));
  if (grid.frame_length > 0 && sample_count >= grid.frame_length) {
    grid.frame_count = (sample_count - grid.frame_length) / grid.hop + 1;
  }
  return grid;
}

Frames make_frames(const AudioClip& clip, FrameParams params) {
  Frames frames;
  frames.grid = frame_grid(clip.size(), clip.sample_rate(), params);
  frames.views.reserve(frames.grid.frame_count);
  const std::span<const double> all(clip.samples());
  for (std::size_t i = 0; i < frames.grid.frame_count; ++i) {
    frames.views.push_back(all.subspan(i * frames.grid.hop, frames.grid.frame_length));
  }
  return frames;
}

AudioClip decode_wav(std::span<const unsigned char> b) {
  if (b.size() < 12 || !tag_is(b, 0, "RIFF") || !tag_is(b, 8, "WAVE")) {
    throw Error(Errc::decode, "not a RIFF/WAVE stream");
  }
  std::optional<FmtChunk> fmt;
  std::optional<std::span<const unsigned char>> data;
  std::size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::uint32_t size = read_u32(b, at + 4);
    const std::size_t body = at + 8;
    if (tag_is(b, at, "fmt ")) {
      if (size < 16 || body + size > b.size()) throw Error(Errc::decode, "truncated fmt chunk");
      FmtChunk f;
      f.format = read_u16(b, body);
      f.channels = read_u16(b, body + 2);
      f.rate = read_u32(b, body + 4);
      f.bits = read_u16(b, body + 14);
      if (f.format == kFormatExtensible && size >= 26) f.format = read_u16(b, body + 24);
      fmt = f;
    } else if (tag_is(b, at, "data")) {
      if (body + size > b.size()) throw Error(Errc::decode, "truncated data chunk");
      data = b.subspan(body, size);
      break;
    }
    at = body + size + (size & 1u);
  }
  if (!fmt) throw Error(Errc::decode, "missing fmt chunk");
  if (!data) throw Error(Errc::decode, "missing data chunk");

  const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
  const bool float32 = fmt->format == kFormatFloat && fmt->bits == 32;
  if (!pcm16 && !float32) {
    throw Error(Errc::unsupported_encoding, "unsupported WAV encoding (format " +
                                                std::to_string(fmt->format) + ", " +
                                                std::to_string(fmt->bits) + " bits)");
  }
  if (fmt->channels < 1 || fmt->channels > 2) {
    throw Error(Errc::unsupported_encoding,
                std::to_string(fmt->channels) + "-channel WAV not supported");
  }
  const std::size_t width = fmt->bits / 8u;
  const std::size_t channels = fmt->channels;
  const std::size_t frames = data->size() / (width * channels);
  if (frames == 0) throw Error(Errc::empty_payload, "WAV data chunk holds no samples");

  std::vector<double> mono(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t off = (i * channels + c) * width;
      if (pcm16) {
        acc += static_cast<std::int16_t>(read_u16(*data, off)) / 32768.0;
      } else {
        acc += static_cast<double>(std::bit_cast<float>(read_u32(*data, off)));
      }
    }
    mono[i] = acc / static_cast<double>(channels);
  }
  if (fmt->rate < kMinSampleRate || fmt->rate > kMaxSampleRate) {
    throw Error(Errc::unsupported_encoding, "sample rate " + std::to_string(fmt->rate) +
                                                " Hz outside supported range");
  }
  try {
    return AudioClip(std::move(mono), static_cast<int>(fmt->rate));
  } catch (const Error& e) {
    throw Error(Errc::decode, e.what());
  }
}

std::vector<unsigned char> encode_wav(const AudioClip& clip) {
  if (clip.empty()) throw Error(Errc::empty_payload, "refusing to encode a zero-length clip");
  clip.validate_range();
  const auto data_bytes = static_cast<std::uint32_t>(clip.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : clip.samples()) {
    const auto q = static_cast<long>(std::lround(s * 32768.0));
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L))));
  }
  return out;
}

AudioClip load_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::io, "read failed for " + path.string());
  return decode_wav(bytes);
}

void save_audio(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav(clip);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::io, "write failed for " + path.string());
}

AudioClip resample(const AudioClip& clip, int target_rate_hz) {
  if (target_rate_hz < kMinSampleRate || target_rate_hz > kMaxSampleRate) {
    throw Error(Errc::invalid_argument, "target rate " + std::to_string(target_rate_hz) +
                                            " Hz outside [8000, 192000]");
  }
  if (target_rate_hz == clip.sample_rate()) return clip;
  const double ratio = static_cast<double>(target_rate_hz) / clip.sample_rate();
  return AudioClip(kernels::resample_ratio(clip.samples(), ratio), target_rate_hz);
}

namespace kernels {

std::vector<double> resample_ratio(std::span<const double> in, double ratio) {
  check_ratio(ratio);
  const SincKernel k = kernel_for(ratio);
  std::vector<double> out(resampled_length(in.size(), ratio));
  const auto n = static_cast<long>(out.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = interpolate_at(in, static_cast<double>(i) / ratio, k);
  }
  return out;
}

std::vector<double> resample_ratio_serial(std::span<const double> in, double ratio) {
  check_ratio(ratio);
  const SincKernel k = kernel_for(ratio);
  std::vector<double> out(resampled_length(in.size(), ratio));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = interpolate_at(in, static_cast<double>(i) / ratio, k);
  }
  return out;
}

}  // namespace kernels

}  // namespace percept
