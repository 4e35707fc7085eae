// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/attributes.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

namespace {

constexpr std::string_view kBuiltinLexicon = R"(# phrase	factor	level
he	gender	male
him	gender	male
his	gender	male
man	gender	male
male	gender	male
she	gender	female
her	gender	female
woman	gender	female
female	gender	female
calmly	emotion	neutral
neutral	emotion	neutral
in a neutral mood	emotion	neutral
plainly	emotion	neutral
happily	emotion	happy
cheerfully	emotion	happy
happy	emotion	happy
joyfully	emotion	happy
sadly	emotion	sad
sorrowfully	emotion	sad
sad	emotion	sad
gloomily	emotion	sad
angrily	emotion	angry
furiously	emotion	angry
angry	emotion	angry
with surprise	emotion	surprise
in astonishment	emotion	surprise
surprised	emotion	surprise
fearfully	emotion	fear
anxiously	emotion	fear
fearful	emotion	fear
afraid	emotion	fear
with disgust	emotion	disgust
in disgust	emotion	disgust
disgusted	emotion	disgust
lower vocal	pitch	low
low pitch	pitch	low
low-pitched	pitch	low
low tone	pitch	low
deep voice	pitch	low
deep	pitch	low
moderate pitch	pitch	neutral
normal pitch	pitch	neutral
medium pitch	pitch	neutral
treble tone	pitch	high
treble	pitch	high
high pitch	pitch	high
high-pitched	pitch	high
slowly	speed	slow
slow pace	speed	slow
slow	speed	slow
unhurriedly	speed	slow
moderate pace	speed	neutral
steady pace	speed	neutral
normal speed	speed	neutral
quickly	speed	fast
fast pace	speed	fast
fast	speed	fast
rapidly	speed	fast
subdued energy	energy	low
subbed energy	energy	low
low energy	energy	low
softly	energy	low
quietly	energy	low
moderate energy	energy	neutral
normal volume	energy	neutral
normal energy	energy	neutral
energetically	energy	high
high energy	energy	high
loudly	energy	high
forcefully	energy	high
)";

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<int> parse_value(Factor f, std::string_view s) {
  switch (f) {
    case Factor::gender:
      if (auto g = parse_gender(s)) return static_cast<int>(*g);
      return std::nullopt;
    case Factor::emotion:
      if (auto e = parse_emotion(s)) return static_cast<int>(*e);
      return std::nullopt;
    default:
      if (auto l = parse_level(s)) return static_cast<int>(*l);
      return std::nullopt;
  }
}

void set_value(AttributeProfile& p, Factor f, int v) {
  switch (f) {
    case Factor::gender: p.gender = static_cast<Gender>(v); break;
    case Factor::emotion: p.emotion = static_cast<Emotion>(v); break;
    case Factor::pitch: p.pitch = static_cast<Level>(v); break;
    case Factor::speed: p.speed = static_cast<Level>(v); break;
    case Factor::energy: p.energy = static_cast<Level>(v); break;
  }
}

Terciles terciles_of(std::vector<double> values) {
  return {order_statistic(values, 1.0 / 3.0), order_statistic(std::move(values), 2.0 / 3.0)};
}

void check_terciles(const Terciles& t, std::string_view what) {
  if (!(t.t1 > 0.0)) {
    throw Error(Errc::invariant_violation, std::string(what) + " terciles must be positive");
  }
  if (!(t.t1 < t.t2)) {
    throw Error(Errc::degenerate_distribution,
                std::string(what) + " distribution is degenerate (t1 >= t2)");
  }
}

}  // namespace

std::string_view to_string(Gender g) {
  switch (g) {
    case Gender::male: return "male";
    case Gender::female: return "female";
    case Gender::unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Emotion e) {
  static constexpr std::array<std::string_view, 7> names{"neutral", "happy", "sad",    "angry",
                                                         "surprise", "fear", "disgust"};
  return names[static_cast<std::size_t>(e)];
}

std::string_view to_string(Factor f) {
  static constexpr std::array<std::string_view, 5> names{"gender", "emotion", "pitch", "speed",
                                                         "energy"};
  return names[static_cast<std::size_t>(f)];
}

std::string_view to_string(Level l) {
  static constexpr std::array<std::string_view, 3> names{"low", "neutral", "high"};
  return names[static_cast<std::size_t>(l)];
}

std::string_view level_name(Factor f, Level l) {
  if (f == Factor::speed) {
    static constexpr std::array<std::string_view, 3> names{"slow", "neutral", "fast"};
    return names[static_cast<std::size_t>(l)];
  }
  return to_string(l);
}

std::optional<Gender> parse_gender(std::string_view s) {
  for (Gender g : kAllGenders) {
    if (to_string(g) == s) return g;
  }
  return std::nullopt;
}

std::optional<Emotion> parse_emotion(std::string_view s) {
  for (Emotion e : kAllEmotions) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

std::optional<Factor> parse_factor(std::string_view s) {
  for (Factor f : kAllFactors) {
    if (to_string(f) == s) return f;
  }
  return std::nullopt;
}

std::optional<Level> parse_level(std::string_view s) {
  if (s == "low" || s == "slow") return Level::low;
  if (s == "neutral") return Level::neutral;
  if (s == "high" || s == "fast") return Level::high;
  return std::nullopt;
}

int AttributeProfile::index_of(Factor f) const {
  switch (f) {
    case Factor::gender: return static_cast<int>(gender);
    case Factor::emotion: return static_cast<int>(emotion);
    case Factor::pitch: return static_cast<int>(pitch);
    case Factor::speed: return static_cast<int>(speed);
    case Factor::energy: return static_cast<int>(energy);
  }
  return 0;
}

std::string AttributeProfile::label(Factor f) const {
  switch (f) {
    case Factor::gender: return std::string(percept::to_string(gender));
    case Factor::emotion: return std::string(percept::to_string(emotion));
    case Factor::pitch: return std::string(level_name(f, pitch));
    case Factor::speed: return std::string(level_name(f, speed));
    case Factor::energy: return std::string(level_name(f, energy));
  }
  return {};
}

std::string AttributeProfile::to_string() const {
  std::string out;
  for (Factor f : kAllFactors) {
    if (!out.empty()) out += ',';
    out += label(f);
  }
  return out;
}

AttributeProfile parse_profile(std::string_view text) {
  AttributeProfile p;
  std::size_t field = 0;
  while (true) {
    const auto comma = text.find(',');
    std::string part(trim(text.substr(0, comma)));
    std::transform(part.begin(), part.end(), part.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (field >= kAllFactors.size()) {
      throw Error(Errc::parse, "profile has more than 5 fields");
    }
    const Factor f = kAllFactors[field];
    const auto v = parse_value(f, part);
    if (!v) {
      throw Error(Errc::parse, "invalid " + std::string(percept::to_string(f)) + " value '" +
                                   std::string(part) + "'");
    }
    set_value(p, f, *v);
    ++field;
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  if (field != kAllFactors.size()) {
    throw Error(Errc::parse, "profile needs 5 comma-separated fields: gender,emotion,pitch,speed,energy");
  }
  return p;
}

std::vector<AttributeProfile> profile_grid() {
  std::vector<AttributeProfile> grid;
  grid.reserve(378);
  for (Gender g : {Gender::male, Gender::female}) {
    for (Emotion e : kAllEmotions) {
      for (Level p : kAllLevels) {
        for (Level s : kAllLevels) {
          for (Level en : kAllLevels) grid.push_back({g, e, p, s, en});
        }
      }
    }
  }
  return grid;
}

void Calibration::validate() const {
  check_terciles(pitch_male_hz, "male pitch");
  check_terciles(pitch_female_hz, "female pitch");
  check_terciles(speed_wps, "speed");
  check_terciles(energy_rms, "energy");
  if (!(gender_f0_threshold_hz > 0.0)) {
    throw Error(Errc::invariant_violation, "gender threshold must be positive");
  }
}

double order_statistic(std::vector<double> values, double p) {
  if (values.empty()) throw Error(Errc::insufficient_data, "order statistic of an empty set");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  const double h = n * p + 0.5;  // 1-based fractional rank
  if (h <= 1.0) return values.front();
  if (h >= n) return values.back();
  const auto below = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(below);
  return values[below - 1] + frac * (values[below] - values[below - 1]);
}

Calibration calibrate(std::span<const ProsodyTrack> tracks, double gender_f0_threshold_hz) {
  std::vector<double> f0_all, f0_male, f0_female, rates, energies;
  for (const auto& t : tracks) {
    if (t.voiced_count() == 0) continue;
    f0_all.push_back(t.mean_f0_hz);
    (t.mean_f0_hz < gender_f0_threshold_hz ? f0_male : f0_female).push_back(t.mean_f0_hz);
    energies.push_back(t.mean_rms);
    if (t.speech_rate_wps && !t.rate_low_confidence) rates.push_back(*t.speech_rate_wps);
  }
  if (f0_all.size() < 3) {
    throw Error(Errc::insufficient_data, "calibration needs at least 3 tracks with voiced content");
  }
  if (rates.size() < 3) {
    throw Error(Errc::insufficient_data, "calibration needs at least 3 tracks with transcripts");
  }
  Calibration cal;
  cal.gender_f0_threshold_hz = gender_f0_threshold_hz;
  const Terciles pooled = terciles_of(f0_all);
  cal.pitch_male_hz = f0_male.size() >= 3 ? terciles_of(f0_male) : pooled;
  cal.pitch_female_hz = f0_female.size() >= 3 ? terciles_of(f0_female) : pooled;
  cal.speed_wps = terciles_of(rates);
  cal.energy_rms = terciles_of(energies);
  cal.validate();
  return cal;
}

Level level_for(double value, const Terciles& t) {
  if (value <= t.t1) return Level::low;
  if (value <= t.t2) return Level::neutral;
  return Level::high;
}

AttributeProfile bin_profile(const ProsodyTrack& track, const Calibration& cal,
                             std::optional<Emotion> emotion_hint) {
  AttributeProfile p;
  p.emotion = emotion_hint.value_or(Emotion::neutral);
  if (track.voiced_count() == 0) return p;

  p.gender = track.mean_f0_hz < cal.gender_f0_threshold_hz ? Gender::male : Gender::female;
  p.pitch = level_for(track.mean_f0_hz,
                      p.gender == Gender::male ? cal.pitch_male_hz : cal.pitch_female_hz);
  if (track.speech_rate_wps && !track.rate_low_confidence) {
    p.speed = level_for(*track.speech_rate_wps, cal.speed_wps);
  }
  p.energy = level_for(track.mean_rms, cal.energy_rms);
  return p;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '\'' || c >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;

    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      cols.push_back(trim(line.substr(start, tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    const auto fail = [&](const std::string& why) {
      return Error(Errc::parse, "lexicon line " + std::to_string(line_no) + ": " + why);
    };
    if (cols.size() != 3) throw fail("expected 'phrase<TAB>factor<TAB>level'");
    const auto factor = parse_factor(cols[1]);
    if (!factor) throw fail("unknown factor '" + std::string(cols[1]) + "'");
    const auto value = parse_value(*factor, cols[2]);
    if (!value) throw fail("unknown level '" + std::string(cols[2]) + "'");
    auto tokens = word_tokens(cols[0]);
    if (tokens.empty()) throw fail("empty phrase");

    lex.compiled_.push_back({std::move(tokens), cols[0].size(), lex.entries_.size()});
    lex.entries_.push_back({lower(cols[0]), *factor, *value});
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string_view Lexicon::builtin_text() { return kBuiltinLexicon; }

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(kBuiltinLexicon);
  return lex;
}

bool Lexicon::contains(std::string_view phrase, Factor f, int value) const {
  const std::string key = lower(phrase);
  return std::any_of(entries_.begin(), entries_.end(), [&](const LexiconEntry& e) {
    return e.phrase == key && e.factor == f && e.value == value;
  });
}

AttributeProfile Lexicon::classify(std::string_view caption) const {
  const auto tokens = word_tokens(caption);
  std::array<const Compiled*, 5> best{};
  for (const auto& c : compiled_) {
    const auto slot = static_cast<std::size_t>(entries_[c.entry].factor);
    if (best[slot] && best[slot]->length >= c.length) continue;
    const auto hit = std::search(tokens.begin(), tokens.end(), c.tokens.begin(), c.tokens.end());
    if (hit != tokens.end()) best[slot] = &c;
  }
  AttributeProfile p;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (best[i]) set_value(p, kAllFactors[i], entries_[best[i]->entry].value);
  }
  return p;
}

AttributeProfile LexiconClassifier::classify(std::string_view caption) const {
  if (trim(caption).empty()) throw Error(Errc::invalid_argument, "caption text is empty");
  return lexicon_->classify(caption);
}

AttributeProfile classify_caption(std::string_view caption) {
  return LexiconClassifier().classify(caption);
}

}  // namespace percept
