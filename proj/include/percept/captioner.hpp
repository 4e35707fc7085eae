// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "percept/attributes.hpp"

namespace percept {

struct Caption {
  std::string text;
  std::string instruction_id;
  AttributeProfile profile;
};

struct Instruction {
  std::string id;
  std::string pattern;  // contains each of {gender} {emotion} {pitch} {speed} {energy} once
};

/// Phrasing templates. Text format: one template per line, optionally
/// prefixed by `id<TAB>`; blank lines and '#' comments ignored.
class InstructionBank {
 public:
  static InstructionBank parse(std::string_view text);
  static InstructionBank load(const std::filesystem::path& path);
  static const InstructionBank& builtin();
  static std::string_view builtin_text();

  explicit InstructionBank(std::vector<Instruction> instructions);

  const std::vector<Instruction>& instructions() const noexcept { return instructions_; }
  std::size_t size() const noexcept { return instructions_.size(); }

  /// Bank invariants: at least five templates, every slot exactly once, and
  /// every slot filler registered in `lexicon` under the right value.
  void validate(const Lexicon& lexicon = Lexicon::builtin()) const;

 private:
  std::vector<Instruction> instructions_;
};

/// Slot fillers for every factor value (gender unknown has none).
const std::vector<std::string>& slot_phrases(Factor f, int value);

/// Renders one instruction with explicit filler choices. Omitted factors are
/// removed together with their separator. Exposed for exhaustive tests.
std::string render_instruction(const Instruction& ins, const AttributeProfile& profile,
                               const std::array<std::size_t, 5>& variant,
                               std::initializer_list<Factor> omit = {});

/// Throws unknown_gender when profile.gender is unknown. Omitted factors are
/// reported as neutral in the returned profile.
Caption generate_caption(const AttributeProfile& profile, const InstructionBank& bank,
                         std::uint64_t seed, std::initializer_list<Factor> omit = {});

struct CaptionContext {
  const Calibration* calibration = nullptr;
  const InstructionBank* bank = &InstructionBank::builtin();
  ProsodyConfig prosody;
};

/// extract_prosody -> bin_profile -> generate_caption. An empty transcript
/// leaves the speed slot out.
Caption caption_turn(const AudioClip& clip, std::string_view transcript,
                     const CaptionContext& ctx, std::optional<Emotion> emotion_hint,
                     std::uint64_t seed);

/// caption_turn, substituting `fallback` when the clip has no voiced frames.
Caption caption_turn_or(const AudioClip& clip, std::string_view transcript,
                        const CaptionContext& ctx, std::optional<Emotion> emotion_hint,
                        std::uint64_t seed, const AttributeProfile& fallback);

}  // namespace percept
