// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <compare>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "percept/prosody.hpp"

namespace percept {

enum class Gender { male, female, unknown };
enum class Emotion { neutral, happy, sad, angry, surprise, fear, disgust };
enum class Level { low, neutral, high };

/// Speaking-rate levels share `Level`; these aliases read better at call sites.
inline constexpr Level kSlow = Level::low;
inline constexpr Level kFast = Level::high;

enum class Factor { gender, emotion, pitch, speed, energy };

inline constexpr std::array kAllGenders{Gender::male, Gender::female, Gender::unknown};
inline constexpr std::array kAllEmotions{Emotion::neutral, Emotion::happy,    Emotion::sad,
                                         Emotion::angry,   Emotion::surprise, Emotion::fear,
                                         Emotion::disgust};
inline constexpr std::array kAllLevels{Level::low, Level::neutral, Level::high};
inline constexpr std::array kAllFactors{Factor::gender, Factor::emotion, Factor::pitch,
                                        Factor::speed, Factor::energy};

std::string_view to_string(Gender g);
std::string_view to_string(Emotion e);
std::string_view to_string(Factor f);
/// Level names depend on the factor: speed uses slow/neutral/fast.
std::string_view level_name(Factor f, Level l);
std::string_view to_string(Level l);

std::optional<Gender> parse_gender(std::string_view s);
std::optional<Emotion> parse_emotion(std::string_view s);
std::optional<Factor> parse_factor(std::string_view s);
/// Accepts low/neutral/high and slow/fast.
std::optional<Level> parse_level(std::string_view s);

/// The five style factors. Ordered field-by-field in declaration order.
struct AttributeProfile {
  Gender gender = Gender::unknown;
  Emotion emotion = Emotion::neutral;
  Level pitch = Level::neutral;
  Level speed = Level::neutral;
  Level energy = Level::neutral;

  auto operator<=>(const AttributeProfile&) const = default;

  /// Value of a factor as its enumeration index.
  int index_of(Factor f) const;
  /// Label of a factor value, e.g. "female", "happy", "fast".
  std::string label(Factor f) const;
  /// "female,happy,high,fast,high"
  std::string to_string() const;
};

/// Parses the comma-separated form produced by `AttributeProfile::to_string`.
AttributeProfile parse_profile(std::string_view text);

/// Every profile with a known gender: 2 x 7 x 3 x 3 x 3 = 378, in order.
std::vector<AttributeProfile> profile_grid();

struct Terciles {
  double t1 = 0.0;
  double t2 = 0.0;
};

struct Calibration {
  Terciles pitch_male_hz;
  Terciles pitch_female_hz;
  Terciles speed_wps;
  Terciles energy_rms;
  double gender_f0_threshold_hz = 165.0;

  /// Throws invariant_violation unless every pair has 0 < t1 < t2.
  void validate() const;
};

/// Order statistic at probability p with midpoint plotting positions
/// ((k - 0.5) / n), linearly interpolated. Input need not be sorted.
double order_statistic(std::vector<double> values, double p);

Calibration calibrate(std::span<const ProsodyTrack> tracks, double gender_f0_threshold_hz = 165.0);

/// Upper bounds are inclusive, so a value on a boundary takes the lower level.
Level level_for(double value, const Terciles& t);

AttributeProfile bin_profile(const ProsodyTrack& track, const Calibration& cal,
                             std::optional<Emotion> emotion_hint = std::nullopt);

struct LexiconEntry {
  std::string phrase;  // lower-case
  Factor factor;
  int value;  // enumeration index within the factor
};

/// Phrase lexicon mapping caption wording back to factor values.
/// File format: `phrase TAB factor TAB level` per line, '#' comments allowed.
class Lexicon {
 public:
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::filesystem::path& path);
  static const Lexicon& builtin();
  static std::string_view builtin_text();

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  bool contains(std::string_view phrase, Factor f, int value) const;

  /// Longest matching phrase per factor decides; unmatched factors stay at
  /// unknown gender / neutral. Matching is case-insensitive on word
  /// boundaries.
  AttributeProfile classify(std::string_view caption) const;

 private:
  struct Compiled {
    std::vector<std::string> tokens;
    std::size_t length;
    std::size_t entry;
  };
  std::vector<LexiconEntry> entries_;
  std::vector<Compiled> compiled_;
};

/// Tokenizer shared by the lexicon and the content-similarity metric:
/// lower-cases and splits on anything other than letters, digits, '-' and '\''.
std::vector<std::string> word_tokens(std::string_view text);

/// Sentence classifier recovering a profile from a caption.
class CaptionClassifier {
 public:
  virtual ~CaptionClassifier() = default;
  virtual AttributeProfile classify(std::string_view caption) const = 0;
};

class LexiconClassifier final : public CaptionClassifier {
 public:
  explicit LexiconClassifier(const Lexicon& lexicon = Lexicon::builtin()) : lexicon_(&lexicon) {}
  /// Throws invalid_argument on empty (or all-whitespace) text.
  AttributeProfile classify(std::string_view caption) const override;

 private:
  const Lexicon* lexicon_;
};

AttributeProfile classify_caption(std::string_view caption);

}  // namespace percept
