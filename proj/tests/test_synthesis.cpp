// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "json.hpp"
#include "mock_server.hpp"
#include "percept/harness.hpp"
#include "percept/prosody.hpp"
#include "percept/synthesis.hpp"
#include "support.hpp"

using namespace percept;
using namespace percept::testing;

TEST_CASE("directive table lookups and clamping") {
  const AttributeProfile neutral{Gender::male, Emotion::neutral, Level::neutral, Level::neutral, Level::neutral};
  const SynthesisDirective n = directive_from_profile(neutral);
  CHECK(n.pitch_scale == 1.0);
  CHECK(n.time_scale == 1.0);
  CHECK(n.gain_db == 0.0);

  const AttributeProfile loud{Gender::female, Emotion::angry, Level::high, Level::high, Level::high};
  const SynthesisDirective d = directive_from_profile(loud);
  CHECK(d.pitch_scale == doctest::Approx(1.25 * 1.05));
  CHECK(d.time_scale == doctest::Approx(0.8 * 0.95));
  CHECK(d.gain_db == doctest::Approx(9.0));
  CHECK(d.emotion_preset == Emotion::angry);

  DirectiveTable wild;
  wild.pitch_scale = {0.1, 1.0, 5.0};
  wild.gain_db = {-40.0, 0.0, 40.0};
  const SynthesisDirective c = directive_from_profile(loud, wild);
  CHECK(c.pitch_scale == 2.0);
  CHECK(c.gain_db == 12.0);
  CHECK_NOTHROW(c.validate());

  for (const auto& p : profile_grid()) CHECK_NOTHROW(directive_from_profile(p).validate());

  SynthesisDirective bad;
  bad.time_scale = 3.0;
  CHECK(error_code_of([&] { bad.validate(); }) == Errc::invariant_violation);
}

TEST_CASE("time stretch changes duration and keeps pitch") {
  const AudioClip src = tone(180.0, 1.0);
  for (double f : {0.5, 0.8, 1.0, 1.25, 2.0}) {
    CAPTURE(f);
    const AudioClip out = time_stretch(src, f);
    CHECK(out.size() == static_cast<std::size_t>(std::llround(16000 * f)));
    const ProsodyTrack t = extract_prosody(out, std::nullopt);
    CHECK(t.mean_f0_hz == doctest::Approx(180.0).epsilon(0.02));
  }
  CHECK(error_code_of([&] { time_stretch(src, 2.5); }) == Errc::invalid_argument);
  CHECK(time_stretch(AudioClip({}, 16000), 1.5).empty());
}

TEST_CASE("pitch shift scales F0 and preserves length") {
  const AudioClip src = tone(160.0, 1.0);
  for (double f : {0.8, 1.1, 1.25, 1.5}) {
    CAPTURE(f);
    const AudioClip out = pitch_shift(src, f);
    CHECK(out.size() == src.size());
    const ProsodyTrack t = extract_prosody(out, std::nullopt);
    CHECK(t.mean_f0_hz == doctest::Approx(160.0 * f).epsilon(0.02));
  }
  CHECK(error_code_of([&] { pitch_shift(src, 0.3); }) == Errc::invalid_argument);
}

TEST_CASE("gain and limiter") {
  const AudioClip src = tone(200.0, 0.5, 16000, 0.2);
  const AudioClip louder = apply_gain(src, 6.0);
  CHECK(rms(louder) / rms(src) == doctest::Approx(std::pow(10.0, 6.0 / 20.0)).epsilon(1e-9));
  CHECK(rms(apply_gain(src, -12.0)) / rms(src) == doctest::Approx(std::pow(10.0, -12.0 / 20.0)));
  CHECK(error_code_of([&] { apply_gain(src, 12.5); }) == Errc::invalid_argument);
  CHECK(error_code_of([&] { apply_gain(src, -13.0); }) == Errc::invalid_argument);

  const AudioClip hot = apply_gain(tone(200.0, 0.5, 16000, 0.9), 12.0);
  CHECK_NOTHROW(hot.validate_range());
  double peak = 0.0;
  for (double s : hot.samples()) peak = std::max(peak, std::abs(s));
  CHECK(peak <= 1.0);
  CHECK(peak > 0.99);
}

TEST_CASE("mock voice output") {
  const VoiceSpec v{"v", 120.0, VoiceBackend::mock};
  const AudioClip c = mock_tts("one two three four five", v);
  CHECK(c.sample_rate() == kMockTtsRate);
  CHECK(c.duration_s() == doctest::Approx(5 / kDefaultSpeakingRate));
  double peak = 0.0;
  for (double s : c.samples()) peak = std::max(peak, std::abs(s));
  CHECK(peak <= 0.5);
  CHECK(c.samples() == mock_tts("one two three four five", v).samples());
  CHECK(error_code_of([&] { mock_tts("  ", v); }) == Errc::invalid_argument);
  CHECK(error_code_of([&] { mock_tts("hi", v, 0.0); }) == Errc::invalid_argument);
}

TEST_CASE("rendered directives read back on every level combination") {
  const VoiceTable& voices = VoiceTable::builtin();
  const MockTtsBackend tts;
  const Calibration cal = reference_calibration(voices, tts);
  const std::string text = "please tell me more about how your day went";
  int pitch_ok = 0, speed_ok = 0, energy_ok = 0, total = 0;
  for (const auto& voice : voices.voices()) {
    const AudioClip base = tts.speak(text, voice);
    for (Level p : kAllLevels) {
      for (Level s : kAllLevels) {
        for (Level e : kAllLevels) {
          const AttributeProfile want{voice.gender(), Emotion::neutral, p, s, e};
          const AudioClip out = render_directive(base, directive_from_profile(want));
          const AttributeProfile got = bin_profile(extract_prosody(out, text), cal);
          CHECK(got.gender == want.gender);
          pitch_ok += got.pitch == p;
          speed_ok += got.speed == s;
          energy_ok += got.energy == e;
          ++total;
        }
      }
    }
  }
  CHECK(total == 54);
  CHECK(pitch_ok >= total - 4);
  CHECK(speed_ok >= total - 4);
  CHECK(energy_ok >= total - 4);
}

TEST_CASE("synthesize resolves the plan's voice") {
  ResponsePlan plan;
  plan.content = "that sounds lovely";
  plan.attributes = {Gender::female, Emotion::happy, Level::high, Level::neutral, Level::neutral};
  plan.voice_id = VoiceTable::builtin().voices()[1].voice_id;
  const AudioClip out = synthesize(plan, VoiceTable::builtin(), MockTtsBackend());
  CHECK_FALSE(out.empty());
  plan.voice_id = "nobody";
  CHECK(error_code_of([&] { synthesize(plan, VoiceTable::builtin(), MockTtsBackend()); }) == Errc::not_found);
  plan.voice_id = VoiceTable::builtin().voices()[1].voice_id;
  plan.content.clear();
  CHECK(error_code_of([&] { synthesize(plan, VoiceTable::builtin(), MockTtsBackend()); }) ==
        Errc::invalid_argument);
}

TEST_CASE("remote voice decodes the WAV reply") {
  const VoiceSpec v{"remote-f", 230.0, VoiceBackend::remote};
  nlohmann::json seen;
  LocalServer server([&](httplib::Server& s) {
    s.Post("/tts", [&](const httplib::Request& req, httplib::Response& res) {
      seen = nlohmann::json::parse(req.body);
      const auto wav = encode_wav(mock_tts(seen["text"].get<std::string>(), v));
      res.set_content(std::string(wav.begin(), wav.end()), "audio/wav");
    });
    s.Post("/junk", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("not audio", "text/plain");
    });
  });
  TtsConfig cfg;
  cfg.endpoint = server.url("/tts");
  cfg.initial_backoff = std::chrono::milliseconds(1);
  const AudioClip c = RemoteTtsBackend(cfg).speak("hello there friend", v);
  CHECK(seen["voice"] == "remote-f");
  CHECK(seen["base_f0_hz"] == 230.0);
  CHECK(c.duration_s() == doctest::Approx(3 / kDefaultSpeakingRate).epsilon(0.001));

  cfg.endpoint = server.url("/junk");
  CHECK(error_code_of([&] { remote_tts("hi", v, cfg); }) == Errc::decode);
  cfg.endpoint.clear();
  CHECK(error_code_of([&] { remote_tts("hi", v, cfg); }) == Errc::invalid_argument);
}
