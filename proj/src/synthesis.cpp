// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>
#include <numbers>
#include <span>

#include "json.hpp"

#include "percept/error.hpp"
#include "percept/prosody.hpp"

namespace percept {

namespace {

constexpr double kLimiterKnee = 0.99;

void check_factor(double factor, std::string_view what) {
  if (!(factor >= 0.5 && factor <= 2.0)) {
    throw Error(Errc::invalid_argument, std::string(what) + " factor must lie in [0.5, 2.0]");
  }
}

std::vector<double> periodic_hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  }
  return w;
}

double limit(double x) {
  const double mag = std::abs(x);
  if (mag <= kLimiterKnee) return x;
  const double headroom = 1.0 - kLimiterKnee;
  return std::copysign(kLimiterKnee + headroom * std::tanh((mag - kLimiterKnee) / headroom), x);
}

}  // namespace

const DirectiveTable& DirectiveTable::builtin() {
  static const DirectiveTable table;
  return table;
}

void SynthesisDirective::validate() const {
  if (!(pitch_scale >= 0.5 && pitch_scale <= 2.0)) {
    throw Error(Errc::invariant_violation, "pitch_scale outside [0.5, 2.0]");
  }
  if (!(time_scale >= 0.5 && time_scale <= 2.0)) {
    throw Error(Errc::invariant_violation, "time_scale outside [0.5, 2.0]");
  }
  if (!(gain_db >= -12.0 && gain_db <= 12.0)) {
    throw Error(Errc::invariant_violation, "gain_db outside [-12, 12]");
  }
}

SynthesisDirective directive_from_profile(const AttributeProfile& profile,
                                          const DirectiveTable& table) {
  const ProsodyDelta& delta = table.emotion[static_cast<std::size_t>(profile.emotion)];
  SynthesisDirective d;
  d.pitch_scale = table.pitch_scale[static_cast<std::size_t>(profile.pitch)] * delta.pitch;
  d.time_scale = table.time_scale[static_cast<std::size_t>(profile.speed)] * delta.time;
  d.gain_db = table.gain_db[static_cast<std::size_t>(profile.energy)] + delta.gain_db;
  d.emotion_preset = profile.emotion;
  d.pitch_scale = std::clamp(d.pitch_scale, 0.5, 2.0);
  d.time_scale = std::clamp(d.time_scale, 0.5, 2.0);
  d.gain_db = std::clamp(d.gain_db, -12.0, 12.0);
  return d;
}

AudioClip time_stretch(const AudioClip& clip, double factor, const WsolaParams& params) {
  check_factor(factor, "time-stretch");
  const int sr = clip.sample_rate();
  const auto frame = static_cast<std::size_t>(std::lround(params.frame_s * sr)) & ~std::size_t{1};
  const auto tolerance = static_cast<long>(std::lround(params.tolerance_s * sr));
  const std::size_t hop = frame / 2;
  const std::size_t n = clip.size();
  const auto out_len = static_cast<std::size_t>(std::llround(static_cast<double>(n) * factor));
  if (n == 0 || frame < 4) return AudioClip(std::vector<double>(out_len, 0.0), sr);

  const double analysis_hop = static_cast<double>(hop) / factor;
  const auto half = static_cast<long>(frame / 2);

  // Zero-padded input so every candidate window stays inside the buffer.
  const long pad = tolerance + static_cast<long>(frame) + static_cast<long>(hop);
  const auto frames = static_cast<long>(out_len / hop) + 2;
  const long last_center = static_cast<long>(std::ceil(static_cast<double>(frames) * analysis_hop));
  const auto padded_len = static_cast<std::size_t>(
      std::max<long>(static_cast<long>(n), last_center) + 2 * pad + static_cast<long>(frame));
  std::vector<double> x(padded_len, 0.0);
  std::copy(clip.samples().begin(), clip.samples().end(), x.begin() + pad);

  const std::vector<double> window = periodic_hann(frame);
  std::vector<double> y(out_len + 2 * frame, 0.0);
  std::vector<double> wsum(y.size(), 0.0);

  // Frame m is centred at m*hop in the output and at m*analysis_hop + delta
  // in the input; x index of a window start is centre - half + pad.
  long delta = 0;
  for (long m = 0; m < frames; ++m) {
    const long in_start = std::lround(static_cast<double>(m) * analysis_hop) + delta - half + pad;
    const long out_start = m * static_cast<long>(hop) - half + static_cast<long>(frame);
    for (std::size_t i = 0; i < frame; ++i) {
      const auto oi = static_cast<std::size_t>(out_start) + i;
      y[oi] += window[i] * x[static_cast<std::size_t>(in_start) + i];
      wsum[oi] += window[i];
    }
    // Pick the next window offset that best continues the current one.
    const long natural = in_start + static_cast<long>(hop);
    const long nominal = std::lround(static_cast<double>(m + 1) * analysis_hop) - half + pad;
    const auto score = [&](long cand, std::size_t stride) {
      const long start = nominal + cand;
      if (start < 0 || static_cast<std::size_t>(start) + frame > x.size()) {
        return -std::numeric_limits<double>::infinity();
      }
      const double* a = x.data() + natural;
      const double* b = x.data() + start;
      double corr = 0.0;
      if (stride == 1) {
#pragma omp simd reduction(+ : corr)
        for (std::size_t i = 0; i < frame; ++i) corr += a[i] * b[i];
      } else {
        for (std::size_t i = 0; i < frame; i += stride) corr += a[i] * b[i];
      }
      return corr;
    };
    // Prefer the smallest |offset| among equal scores (silence, identity).
    const auto better = [](double corr, long cand, double best, long best_cand) {
      return corr > best + 1e-12 || (std::abs(corr - best) <= 1e-12 && std::abs(cand) < std::abs(best_cand));
    };
    // Coarse pass on every other lag and sample, then a full-resolution
    // refinement around the winner.
    double best = -std::numeric_limits<double>::infinity();
    long coarse = 0;
    for (long cand = -tolerance; cand <= tolerance; cand += 2) {
      const double corr = score(cand, 2);
      if (better(corr, cand, best, coarse)) {
        best = corr;
        coarse = cand;
      }
    }
    best = -std::numeric_limits<double>::infinity();
    long best_delta = 0;
    for (long cand = std::max(-tolerance, coarse - 2); cand <= std::min(tolerance, coarse + 2); ++cand) {
      const double corr = score(cand, 1);
      if (better(corr, cand, best, best_delta)) {
        best = corr;
        best_delta = cand;
      }
    }
    delta = best_delta;
  }

  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double w = wsum[i + frame];
    out[i] = w > 1e-9 ? y[i + frame] / w : 0.0;
  }
  return AudioClip(std::move(out), sr);
}

AudioClip pitch_shift(const AudioClip& clip, double factor, const WsolaParams& params) {
  check_factor(factor, "pitch-shift");
  if (factor == 1.0) return clip;
  const AudioClip squeezed(kernels::resample_ratio(clip.samples(), 1.0 / factor), clip.sample_rate());
  const AudioClip stretched = time_stretch(squeezed, factor, params);
  std::vector<double> out = stretched.samples();
  out.resize(clip.size(), 0.0);
  return AudioClip(std::move(out), clip.sample_rate());
}

AudioClip apply_gain(const AudioClip& clip, double gain_db) {
  if (!(gain_db >= -12.0 && gain_db <= 12.0)) {
    throw Error(Errc::invalid_argument, "gain must lie in [-12, 12] dB");
  }
  if (gain_db == 0.0) return clip;
  const double g = std::pow(10.0, gain_db / 20.0);
  std::vector<double> out(clip.samples());
  for (double& s : out) s = limit(s * g);
  return AudioClip(std::move(out), clip.sample_rate());
}

AudioClip mock_tts(std::string_view content, const VoiceSpec& voice, double rate_wps) {
  const std::size_t words = count_words(content);
  if (words == 0) throw Error(Errc::invalid_argument, "mock TTS needs non-empty content");
  if (!(rate_wps > 0.0)) throw Error(Errc::invalid_argument, "speaking rate must be positive");
  constexpr double sr = kMockTtsRate;
  constexpr std::array<double, 3> amps{1.0, 0.5, 0.25};
  constexpr double peak = 0.5;
  constexpr double ramp_s = 0.010;
  const double word_s = 1.0 / rate_wps;
  const auto total = static_cast<std::size_t>(std::llround(static_cast<double>(words) * word_s * sr));
  std::vector<double> out(total, 0.0);

  const double scale = peak / (amps[0] + amps[1] + amps[2]);
  const double w = 2.0 * std::numbers::pi * voice.base_f0_hz / sr;
  for (std::size_t k = 0; k < words; ++k) {
    const auto start = static_cast<std::size_t>(std::llround(static_cast<double>(k) * word_s * sr));
    const auto len = static_cast<std::size_t>(std::llround(0.6 * word_s * sr));
    const auto ramp = std::min(static_cast<std::size_t>(ramp_s * sr), len / 2);
    for (std::size_t i = 0; i < len && start + i < total; ++i) {
      double env = 1.0;
      if (i < ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
      if (len - i <= ramp) env = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(len - i) / static_cast<double>(ramp));
      const double phase = w * static_cast<double>(i);
      double v = 0.0;
      for (std::size_t h = 0; h < amps.size(); ++h) v += amps[h] * std::sin(phase * static_cast<double>(h + 1));
      out[start + i] = scale * env * v;
    }
  }
  return AudioClip(std::move(out), kMockTtsRate);
}

TtsConfig TtsConfig::from_env() {
  TtsConfig c;
  if (const char* e = std::getenv("PERCEPT_TTS_ENDPOINT")) c.endpoint = e;
  return c;
}

AudioClip remote_tts(std::string_view content, const VoiceSpec& voice, const TtsConfig& config) {
  if (config.endpoint.empty()) {
    throw Error(Errc::invalid_argument, "TTS endpoint not configured (PERCEPT_TTS_ENDPOINT)");
  }
  if (content.empty()) throw Error(Errc::invalid_argument, "TTS content is empty");
  const nlohmann::json body = {
      {"text", content}, {"voice", voice.voice_id}, {"base_f0_hz", voice.base_f0_hz}};
  std::map<std::string, std::string> headers;
  if (!config.api_key.empty()) headers["Authorization"] = "Bearer " + config.api_key;
  const http::Response res = http::post_with_retry(
      config.endpoint, body.dump(), "application/json", headers,
      {config.retries, config.initial_backoff, config.timeout_s});
  const auto* bytes = reinterpret_cast<const unsigned char*>(res.body.data());
  try {
    return decode_wav({bytes, res.body.size()});
  } catch (const Error& e) {
    throw Error(Errc::decode, "TTS reply is not decodable audio: " + std::string(e.what()));
  }
}

AudioClip render_directive(const AudioClip& base, const SynthesisDirective& d) {
  d.validate();
  AudioClip out = d.time_scale == 1.0 ? base : time_stretch(base, d.time_scale);
  out = pitch_shift(out, d.pitch_scale);
  return apply_gain(out, d.gain_db);
}

AudioClip synthesize(const ResponsePlan& plan, const VoiceTable& voices, const TtsBackend& backend,
                     const DirectiveTable& table) {
  if (plan.content.empty()) throw Error(Errc::invalid_argument, "plan has no content");
  const VoiceSpec& voice = voices.at(plan.voice_id);
  const AudioClip base = backend.speak(plan.content, voice);
  return render_directive(base, directive_from_profile(plan.attributes, table));
}

}  // namespace percept
