// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <fstream>

#include "doctest.h"
#include "percept/audio.hpp"
#include "percept/prosody.hpp"
#include "support.hpp"

using namespace percept;
using namespace percept::testing;

namespace {

void u16(std::vector<unsigned char>& b, std::uint16_t v) {
  b.push_back(v & 0xFF);
  b.push_back(v >> 8);
}
void u32(std::vector<unsigned char>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back((v >> (8 * i)) & 0xFF);
}
void tag(std::vector<unsigned char>& b, const char* t) { b.insert(b.end(), t, t + 4); }

// Hand-built WAV with an arbitrary header; payload is raw bytes.
std::vector<unsigned char> wav_bytes(std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                                     std::uint16_t bits, const std::vector<unsigned char>& payload,
                                     bool extensible = false) {
  std::vector<unsigned char> b;
  const std::uint32_t fmt_size = extensible ? 40 : 16;
  tag(b, "RIFF");
  u32(b, 4 + 8 + fmt_size + 8 + static_cast<std::uint32_t>(payload.size()));
  tag(b, "WAVE");
  tag(b, "fmt ");
  u32(b, fmt_size);
  u16(b, extensible ? 0xFFFE : format);
  u16(b, channels);
  u32(b, rate);
  u32(b, rate * channels * bits / 8);
  u16(b, static_cast<std::uint16_t>(channels * bits / 8));
  u16(b, bits);
  if (extensible) {
    u16(b, 22);
    u16(b, bits);
    u32(b, 0);
    u16(b, format);
    for (int i = 0; i < 14; ++i) b.push_back(0);
  }
  tag(b, "data");
  u32(b, static_cast<std::uint32_t>(payload.size()));
  b.insert(b.end(), payload.begin(), payload.end());
  return b;
}

std::vector<unsigned char> float_payload(const std::vector<float>& v) {
  std::vector<unsigned char> out(v.size() * 4);
  std::memcpy(out.data(), v.data(), out.size());
  return out;
}

}  // namespace

TEST_CASE("clip construction enforces rate and finiteness") {
  CHECK(error_code_of([] { AudioClip({0.0}, 4000); }) == Errc::invariant_violation);
  CHECK(error_code_of([] { AudioClip({0.0}, 200000); }) == Errc::invariant_violation);
  CHECK(error_code_of([] { AudioClip({std::nan("")}, 16000); }) == Errc::invariant_violation);
  CHECK(error_code_of([] { AudioClip({1.5}, 16000).validate_range(); }) == Errc::invariant_violation);
  CHECK_NOTHROW(AudioClip({1.0, -1.0}, 8000).validate_range());
}

TEST_CASE("frame grid drops partial trailing frames") {
  // 1 s at 16 kHz, 40 ms frames, 10 ms hop: (16000 - 640) / 160 + 1 = 97
  const FrameGrid g = frame_grid(16000, 16000, {});
  CHECK(g.frame_length == 640);
  CHECK(g.hop == 160);
  CHECK(g.frame_count == 97);
  CHECK(frame_grid(639, 16000, {}).frame_count == 0);
  CHECK(frame_grid(640, 16000, {}).frame_count == 1);
  CHECK(frame_grid(799, 16000, {}).frame_count == 1);
  CHECK(frame_grid(800, 16000, {}).frame_count == 2);
  CHECK(error_code_of([] { frame_grid(100, 16000, {0.01, 0.02}); }) == Errc::invalid_argument);
  CHECK(error_code_of([] { frame_grid(100, 16000, {0.04, 0.0}); }) == Errc::invalid_argument);
}

TEST_CASE("frame views cover the clip in hop steps") {
  const AudioClip c = tone(100.0, 0.1);
  const Frames f = make_frames(c, {});
  REQUIRE(f.views.size() == f.grid.frame_count);
  for (std::size_t i = 0; i < f.views.size(); ++i) {
    CHECK(f.views[i].data() == c.samples().data() + i * f.grid.hop);
    CHECK(f.views[i].size() == f.grid.frame_length);
  }
}

TEST_CASE("PCM16 round trip stays within one quantisation step") {
  TempDir dir("audio");
  const AudioClip c = tone(220.0, 0.25, 22050, 0.9);
  save_audio(c, dir / "a.wav");
  const AudioClip back = load_audio(dir / "a.wav");
  REQUIRE(back.size() == c.size());
  CHECK(back.sample_rate() == 22050);
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(back.samples()[i] - c.samples()[i]));
  CHECK(worst <= 1.0 / 32768.0);
  // Encoding is idempotent once quantised.
  CHECK(encode_wav(back) == encode_wav(load_audio(dir / "a.wav")));
}

TEST_CASE("float32, extensible and stereo payloads decode") {
  const std::vector<float> mono{0.0f, 0.25f, -0.5f, 1.0f};
  const AudioClip f = decode_wav(wav_bytes(3, 1, 16000, 32, float_payload(mono)));
  REQUIRE(f.size() == 4);
  CHECK(f.samples()[2] == doctest::Approx(-0.5));

  const AudioClip ext = decode_wav(wav_bytes(3, 1, 16000, 32, float_payload(mono), true));
  CHECK(ext.samples() == f.samples());

  // Stereo frames (L, R) downmix to their mean.
  const std::vector<float> stereo{0.5f, -0.5f, 1.0f, 0.0f};
  const AudioClip s = decode_wav(wav_bytes(3, 2, 16000, 32, float_payload(stereo)));
  REQUIRE(s.size() == 2);
  CHECK(s.samples()[0] == doctest::Approx(0.0));
  CHECK(s.samples()[1] == doctest::Approx(0.5));
}

TEST_CASE("WAV error mapping") {
  const std::vector<unsigned char> pcm8(100, 128);
  CHECK(error_code_of([&] { decode_wav(wav_bytes(1, 1, 16000, 8, pcm8)); }) == Errc::unsupported_encoding);
  CHECK(error_code_of([] { decode_wav(wav_bytes(1, 1, 16000, 16, {})); }) == Errc::empty_payload);
  auto good = wav_bytes(1, 1, 16000, 16, std::vector<unsigned char>(200, 0));
  good.resize(good.size() - 50);
  CHECK(error_code_of([&] { decode_wav(good); }) == Errc::decode);
  const std::vector<unsigned char> junk{'n', 'o', 'p', 'e'};
  CHECK(error_code_of([&] { decode_wav(junk); }) == Errc::decode);
  CHECK(error_code_of([] { load_audio("/nonexistent/dir/x.wav"); }) == Errc::io);
  CHECK(error_code_of([] { encode_wav(AudioClip({}, 16000)); }) == Errc::empty_payload);
  CHECK(error_code_of([] { encode_wav(AudioClip({1.2}, 16000)); }) == Errc::invariant_violation);
}

TEST_CASE("resampling keeps frequency and scales length") {
  const AudioClip c = tone(440.0, 1.0, 44100);
  const AudioClip r = resample(c, 16000);
  CHECK(r.sample_rate() == 16000);
  CHECK(r.size() == 16000);
  const PitchTrack t = detect_f0(r, {}, {});
  std::size_t close = 0;
  for (std::size_t i = 0; i < t.f0_hz.size(); ++i) close += std::abs(t.f0_hz[i] - 440.0) < 0.02 * 440.0;
  CHECK(close == t.f0_hz.size());
  // Amplitude of an in-band tone survives (ignore edges).
  const std::span<const double> mid(r.samples().data() + 1000, 14000);
  double peak = 0.0;
  for (double v : mid) peak = std::max(peak, std::abs(v));
  CHECK(peak == doctest::Approx(0.5).epsilon(0.02));
  CHECK(resample(c, 44100).samples() == c.samples());
  CHECK(error_code_of([&] { resample(c, 1000); }) == Errc::invalid_argument);
}

TEST_CASE("resampling attenuates content above the new Nyquist") {
  const AudioClip c = tone(7000.0, 0.5, 32000);
  const AudioClip r = resample(c, 8000);
  const std::span<const double> mid(r.samples().data() + 200, r.size() - 400);
  double acc = 0.0;
  for (double v : mid) acc += v * v;
  CHECK(std::sqrt(acc / static_cast<double>(mid.size())) < 0.01);
}

TEST_CASE("parallel resampler matches the serial reference exactly") {
  const AudioClip c = noise(3, 0.5, 22050, 0.2);
  for (double ratio : {0.5, 16000.0 / 22050.0, 1.25, 2.0}) {
    CHECK(kernels::resample_ratio(c.samples(), ratio) == kernels::resample_ratio_serial(c.samples(), ratio));
  }
}
