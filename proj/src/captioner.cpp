// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/captioner.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"
#include "percept/random.hpp"

namespace percept {

namespace {

constexpr std::string_view kBuiltinInstructions = R"(# id	template
plain	{gender} speaks {pitch}, {speed} and {energy}, {emotion}.
says	{gender} says it {emotion}, {pitch}, {speed} and {energy}.
talks	{gender} talks {speed} {pitch}, {emotion} and {energy}.
replies	{gender} replies {emotion} {pitch}, {energy}, {speed}.
delivers	{gender} delivers the words {energy}, {pitch}, {speed}, {emotion}.
answers	{gender} answers {speed}, {emotion}, {energy} and {pitch}.
)";

using PhraseList = std::vector<std::string>;

// Indexed [factor][value]. Every entry must exist in the builtin lexicon.
const std::array<std::vector<PhraseList>, 5>& phrase_table() {
  static const std::array<std::vector<PhraseList>, 5> table{{
      // gender: male, female, unknown
      {{"he", "a man", "the male speaker"}, {"she", "a woman", "the female speaker"}, {}},
      // emotion
      {{"calmly", "in a neutral mood"},
       {"happily", "cheerfully"},
       {"sadly", "sorrowfully"},
       {"angrily", "furiously"},
       {"with surprise", "in astonishment"},
       {"fearfully", "anxiously"},
       {"with disgust", "in disgust"}},
      // pitch
      {{"in a lower vocal", "in a low-pitched voice", "with a deep voice"},
       {"at a moderate pitch", "with a normal pitch"},
       {"in a treble tone", "in a high-pitched voice"}},
      // speed
      {{"slowly", "at a slow pace"},
       {"at a moderate pace", "at a steady pace"},
       {"quickly", "at a fast pace", "rapidly"}},
      // energy
      {{"with subdued energy", "softly", "quietly"},
       {"with moderate energy", "at a normal volume"},
       {"energetically", "loudly", "with high energy"}},
  }};
  return table;
}

std::string slot_token(Factor f) { return "{" + std::string(to_string(f)) + "}"; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Removes a slot and the separator that joins it to its neighbours.
void erase_slot(std::string& text, const std::string& token) {
  const auto at = text.find(token);
  if (at == std::string::npos) return;
  const std::string_view before(text.data(), at);
  for (std::string_view sep : {", ", " and "}) {
    if (before.ends_with(sep)) {
      text.erase(at - sep.size(), sep.size() + token.size());
      return;
    }
  }
  const std::string_view after = std::string_view(text).substr(at + token.size());
  if (after.starts_with(", ")) {
    text.erase(at, token.size() + 2);
  } else if (after.starts_with(" ")) {
    text.erase(at, token.size() + 1);
  } else if (at > 0 && text[at - 1] == ' ') {
    text.erase(at - 1, token.size() + 1);
  } else {
    text.erase(at, token.size());
  }
}

}  // namespace

const std::vector<std::string>& slot_phrases(Factor f, int value) {
  return phrase_table()[static_cast<std::size_t>(f)][static_cast<std::size_t>(value)];
}

InstructionBank::InstructionBank(std::vector<Instruction> instructions)
    : instructions_(std::move(instructions)) {}

InstructionBank InstructionBank::parse(std::string_view text) {
  std::vector<Instruction> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    Instruction ins;
    if (const auto tab = line.find('\t'); tab != std::string_view::npos) {
      ins.id = std::string(trim(line.substr(0, tab)));
      ins.pattern = std::string(trim(line.substr(tab + 1)));
    } else {
      ins.id = "i" + std::to_string(out.size());
      ins.pattern = std::string(line);
    }
    out.push_back(std::move(ins));
  }
  InstructionBank bank(std::move(out));
  bank.validate();
  return bank;
}

InstructionBank InstructionBank::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open instruction bank " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string_view InstructionBank::builtin_text() { return kBuiltinInstructions; }

const InstructionBank& InstructionBank::builtin() {
  static const InstructionBank bank = parse(kBuiltinInstructions);
  return bank;
}

void InstructionBank::validate(const Lexicon& lexicon) const {
  if (instructions_.size() < 5) {
    throw Error(Errc::invariant_violation, "instruction bank needs at least 5 templates");
  }
  for (const auto& ins : instructions_) {
    for (Factor f : kAllFactors) {
      const std::string token = slot_token(f);
      const auto first = ins.pattern.find(token);
      if (first == std::string::npos || ins.pattern.find(token, first + 1) != std::string::npos) {
        throw Error(Errc::invariant_violation,
                    "instruction '" + ins.id + "' must contain " + token + " exactly once");
      }
    }
  }
  for (Factor f : kAllFactors) {
    const auto& rows = phrase_table()[static_cast<std::size_t>(f)];
    for (std::size_t v = 0; v < rows.size(); ++v) {
      for (const auto& phrase : rows[v]) {
        if (lexicon.classify(phrase).index_of(f) != static_cast<int>(v)) {
          throw Error(Errc::invariant_violation,
                      "slot phrase '" + phrase + "' is not recognised by the lexicon");
        }
      }
    }
  }
}

std::string render_instruction(const Instruction& ins, const AttributeProfile& profile,
                               const std::array<std::size_t, 5>& variant,
                               std::initializer_list<Factor> omit) {
  std::string text = ins.pattern;
  for (Factor f : omit) erase_slot(text, slot_token(f));
  for (Factor f : kAllFactors) {
    const std::string token = slot_token(f);
    const auto at = text.find(token);
    if (at == std::string::npos) continue;
    const auto& options = slot_phrases(f, profile.index_of(f));
    const auto& phrase = options[variant[static_cast<std::size_t>(f)] % options.size()];
    text.replace(at, token.size(), phrase);
  }
  if (!text.empty()) text[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(text[0])));
  return text;
}

Caption generate_caption(const AttributeProfile& profile, const InstructionBank& bank,
                         std::uint64_t seed, std::initializer_list<Factor> omit) {
  if (profile.gender == Gender::unknown) {
    throw Error(Errc::unknown_gender, "cannot caption a profile with unknown gender");
  }
  if (bank.size() == 0) throw Error(Errc::invariant_violation, "empty instruction bank");
  SeededRng rng(seed);
  const Instruction& ins = bank.instructions()[rng.index(bank.size())];
  std::array<std::size_t, 5> variant{};
  for (auto& v : variant) v = static_cast<std::size_t>(rng.next() & 0xFFFF);

  Caption cap;
  cap.profile = profile;
  for (Factor f : omit) {
    if (f == Factor::gender) throw Error(Errc::invalid_argument, "gender slot cannot be omitted");
    switch (f) {
      case Factor::emotion: cap.profile.emotion = Emotion::neutral; break;
      case Factor::pitch: cap.profile.pitch = Level::neutral; break;
      case Factor::speed: cap.profile.speed = Level::neutral; break;
      case Factor::energy: cap.profile.energy = Level::neutral; break;
      default: break;
    }
  }
  cap.text = render_instruction(ins, cap.profile, variant, omit);
  cap.instruction_id = ins.id;
  return cap;
}

Caption caption_turn(const AudioClip& clip, std::string_view transcript,
                     const CaptionContext& ctx, std::optional<Emotion> emotion_hint,
                     std::uint64_t seed) {
  if (ctx.calibration == nullptr) throw Error(Errc::invalid_argument, "caption_turn needs a calibration");
  const ProsodyTrack track = extract_prosody(clip, transcript, ctx.prosody);
  const AttributeProfile profile = bin_profile(track, *ctx.calibration, emotion_hint);
  if (track.rate_low_confidence) return generate_caption(profile, *ctx.bank, seed, {Factor::speed});
  return generate_caption(profile, *ctx.bank, seed);
}

Caption caption_turn_or(const AudioClip& clip, std::string_view transcript,
                        const CaptionContext& ctx, std::optional<Emotion> emotion_hint,
                        std::uint64_t seed, const AttributeProfile& fallback) {
  try {
    return caption_turn(clip, transcript, ctx, emotion_hint, seed);
  } catch (const Error& e) {
    if (e.code() != Errc::unknown_gender) throw;
  }
  AttributeProfile p = fallback;
  if (emotion_hint) p.emotion = *emotion_hint;
  return generate_caption(p, *ctx.bank, seed);
}

}  // namespace percept
