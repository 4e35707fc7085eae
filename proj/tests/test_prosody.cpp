// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "percept/prosody.hpp"
#include "percept/synthesis.hpp"
#include "support.hpp"

using namespace percept;
using namespace percept::testing;

namespace {

double voiced_within(const PitchTrack& t, double hz, double tol) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < t.f0_hz.size(); ++i) ok += t.voiced[i] && std::abs(t.f0_hz[i] - hz) < tol * hz;
  return static_cast<double>(ok) / static_cast<double>(t.f0_hz.size());
}

}  // namespace

TEST_CASE("pure tones are tracked within 2 percent") {
  for (double hz : {110.0, 220.0, 330.0, 440.0}) {
    CAPTURE(hz);
    const PitchTrack t = detect_f0(tone(hz, 1.0), {}, {});
    CHECK(t.f0_hz.size() == 97);
    CHECK(voiced_within(t, hz, 0.02) == 1.0);
  }
}

TEST_CASE("tones at other sample rates and band edges") {
  CHECK(voiced_within(detect_f0(tone(200.0, 0.5, 44100), {}, {}), 200.0, 0.02) == 1.0);
  CHECK(voiced_within(detect_f0(tone(75.0, 0.5, 8000), {}, {}), 75.0, 0.02) == 1.0);
  CHECK(voiced_within(detect_f0(tone(480.0, 0.5), {}, {}), 480.0, 0.02) == 1.0);
  // Outside the band nothing should be reported.
  const PitchTrack low = detect_f0(tone(30.0, 1.0), {}, {});
  CHECK(voiced_within(low, 30.0, 0.02) == 0.0);
}

TEST_CASE("seeded white noise is unvoiced") {
  // Frozen: N(0, 0.3) from mt19937_64 seed 42, one second at 16 kHz.
  const PitchTrack t = detect_f0(noise(42, 1.0), {}, {});
  REQUIRE(t.f0_hz.size() == 97);
  std::size_t voiced = 0;
  for (bool v : t.voiced) voiced += v;
  CHECK(voiced == 0);
}

TEST_CASE("silence is unvoiced with zero energy") {
  const AudioClip s(std::vector<double>(16000, 0.0), 16000);
  const ProsodyTrack t = extract_prosody(s, "hello");
  CHECK(t.voiced_count() == 0);
  CHECK(t.mean_f0_hz == 0.0);
  CHECK(t.mean_rms == 0.0);
  CHECK_NOTHROW(t.check_invariants({}));
}

TEST_CASE("pitch detection errors") {
  CHECK(error_code_of([] { detect_f0(tone(200.0, 0.02), {}, {}); }) == Errc::insufficient_data);
  CHECK(error_code_of([] { detect_f0(tone(200.0, 1.0), {}, {300.0, 200.0, 0.15}); }) == Errc::invalid_argument);
  CHECK(error_code_of([] { detect_f0(tone(200.0, 1.0, 8000), {}, {60.0, 2500.0, 0.15}); }) ==
        Errc::invalid_argument);
}

TEST_CASE("pitch equivariance: scaling a tone scales its estimate") {
  for (double base : {90.0, 150.0, 210.0}) {
    for (double k : {0.8, 1.25, 1.5}) {
      CAPTURE(base);
      CAPTURE(k);
      const ProsodyTrack a = extract_prosody(tone(base, 0.5), std::nullopt);
      const ProsodyTrack b = extract_prosody(tone(base * k, 0.5), std::nullopt);
      CHECK(b.mean_f0_hz / a.mean_f0_hz == doctest::Approx(k).epsilon(0.01));
    }
  }
}

TEST_CASE("energy scales linearly with amplitude") {
  const ProsodyTrack a = extract_prosody(tone(200.0, 0.5, 16000, 0.2), std::nullopt);
  const ProsodyTrack b = extract_prosody(tone(200.0, 0.5, 16000, 0.4), std::nullopt);
  CHECK(b.mean_rms / a.mean_rms == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(a.mean_rms == doctest::Approx(0.2 / std::sqrt(2.0)).epsilon(0.01));
}

TEST_CASE("speech rate from the transcript") {
  CHECK(count_words("  one two\tthree\nfour ") == 4);
  CHECK(count_words("") == 0);
  const SpeechRate r = estimate_speech_rate("one two three four", 2.0);
  CHECK(r.words_per_second == 2.0);
  CHECK_FALSE(r.low_confidence);
  const SpeechRate e = estimate_speech_rate("   ", 2.0);
  CHECK(e.words_per_second == 0.0);
  CHECK(e.low_confidence);
  CHECK(error_code_of([] { estimate_speech_rate("a", 0.0); }) == Errc::invalid_argument);
}

TEST_CASE("mock voice prosody matches its preset") {
  const VoiceSpec v{"v", 200.0, VoiceBackend::mock};
  const AudioClip c = mock_tts("one two three four", v, 2.0);
  const ProsodyTrack t = extract_prosody(c, "one two three four");
  CHECK(t.duration_s == doctest::Approx(2.0));
  CHECK(t.mean_f0_hz == doctest::Approx(200.0).epsilon(0.01));
  REQUIRE(t.speech_rate_wps);
  CHECK(*t.speech_rate_wps == doctest::Approx(2.0));
  CHECK_NOTHROW(t.check_invariants({}));
  CHECK_FALSE(extract_prosody(c, std::nullopt).speech_rate_wps.has_value());
}

TEST_CASE("invariant checker catches broken tracks") {
  ProsodyTrack t = extract_prosody(tone(200.0, 0.5), std::nullopt);
  t.voiced[3] = false;
  CHECK(error_code_of([&] { t.check_invariants({}); }) == Errc::invariant_violation);
  t = extract_prosody(tone(200.0, 0.5), std::nullopt);
  t.rms.pop_back();
  CHECK(error_code_of([&] { t.check_invariants({}); }) == Errc::invariant_violation);
  t = extract_prosody(tone(200.0, 0.5), std::nullopt);
  t.f0_hz[0] = 900.0;
  CHECK(error_code_of([&] { t.check_invariants({}); }) == Errc::invariant_violation);
}

TEST_CASE("parallel pitch tracker matches the serial reference exactly") {
  const VoiceSpec v{"v", 130.0, VoiceBackend::mock};
  for (const AudioClip& c : {mock_tts("a few words of speech here", v), noise(9, 0.7), tone(310.0, 0.3, 22050)}) {
    const PitchTrack a = detect_f0(c, {}, {});
    const PitchTrack b = detect_f0_serial(c, {}, {});
    CHECK(a.f0_hz == b.f0_hz);
    CHECK(a.voiced == b.voiced);
  }
}
