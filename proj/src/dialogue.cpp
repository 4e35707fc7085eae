// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/dialogue.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <fstream>

#include "json.hpp"

#include "percept/error.hpp"
#include "percept/random.hpp"

namespace percept {

namespace {

using nlohmann::json;

constexpr std::string_view kClassifyMarker = "Return a JSON object";

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string one_line(std::string_view s) {
  std::string out(trim(s));
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\n' || c == '\r'; }, ' ');
  return out;
}

std::string substitute(std::string text, std::string_view key, std::string_view value) {
  for (auto at = text.find(key); at != std::string::npos; at = text.find(key, at + value.size())) {
    text.replace(at, key.size(), value);
  }
  return text;
}

std::span<const DialogueTurn> recent(std::span<const DialogueTurn> history, std::size_t max_turns) {
  if (history.empty()) throw Error(Errc::invalid_argument, "dialogue history is empty; nothing to respond to");
  if (max_turns > 0 && history.size() > max_turns) return history.last(max_turns);
  return history;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  while (true) {
    const auto nl = text.find('\n');
    lines.push_back(text.substr(0, nl));
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return lines;
}

bool iequals_prefix(std::string_view line, std::string_view label) {
  if (line.size() < label.size()) return false;
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(line[i])) != label[i]) return false;
  }
  return true;
}

// Splits "CONTENT: ..." / "CAPTION: ..." labelled blocks; unlabeled text
// continues the preceding field.
struct LabelledFields {
  std::optional<std::string> content;
  std::optional<std::string> caption;
};

LabelledFields scan_labels(std::string_view raw) {
  LabelledFields out;
  std::optional<std::string>* current = nullptr;
  for (std::string_view line : split_lines(raw)) {
    const std::string_view t = trim(line);
    // Tolerate markdown emphasis around labels, e.g. "**CONTENT:**".
    std::string_view body = t;
    while (!body.empty() && (body.front() == '*' || body.front() == '#')) body.remove_prefix(1);
    if (iequals_prefix(body, "content:")) {
      current = &out.content;
      body.remove_prefix(8);
    } else if (iequals_prefix(body, "caption:")) {
      current = &out.caption;
      body.remove_prefix(8);
    } else if (current != nullptr && !t.empty()) {
      **current += " ";
      **current += t;
      continue;
    } else {
      continue;
    }
    while (!body.empty() && body.front() == '*') body.remove_prefix(1);
    *current = std::string(trim(body));
  }
  for (auto* f : {&out.content, &out.caption}) {
    if (*f) *f = std::string(trim(**f));
  }
  return out;
}

struct PromptTurn {
  std::string speaker;
  std::optional<std::string> caption;
  std::string transcript;
};

// Reads back the history block written by the prompt builders.
std::vector<PromptTurn> history_from_prompt(std::string_view user) {
  std::vector<PromptTurn> turns;
  const auto lines = split_lines(user);
  auto it = std::find_if(lines.begin(), lines.end(),
                         [](std::string_view l) { return trim(l) == kHistoryHeader; });
  if (it == lines.end()) return turns;
  for (++it; it != lines.end() && !trim(*it).empty(); ++it) {
    std::string_view line = *it;
    PromptTurn t;
    const auto space = line.find(' ');
    const auto colon = line.find(": ");
    if (space != std::string_view::npos && space + 1 < line.size() && line[space + 1] == '(') {
      const auto close = line.find("): ", space);
      if (close == std::string_view::npos) continue;
      t.speaker = std::string(line.substr(0, space));
      t.caption = std::string(line.substr(space + 2, close - space - 2));
      t.transcript = std::string(line.substr(close + 3));
    } else if (colon != std::string_view::npos) {
      t.speaker = std::string(line.substr(0, colon));
      t.transcript = std::string(line.substr(colon + 2));
    } else {
      continue;
    }
    turns.push_back(std::move(t));
  }
  return turns;
}

const std::array<std::vector<std::string_view>, 7>& reply_bank() {
  static const std::array<std::vector<std::string_view>, 7> bank{{
      {"I see. Tell me more about that.", "Okay, I understand what you mean.",
       "Right, that makes sense to me."},
      {"That's wonderful news, I'm so happy for you!", "Oh that sounds great, tell me everything!"},
      {"I'm so sorry to hear that. Do you want to talk about it?",
       "That sounds really hard, I'm here for you."},
      {"I can see why you're upset, that's not fair.",
       "You have every right to be angry about this."},
      {"Wow, really? I did not see that coming!", "No way, that is a big surprise!"},
      {"That sounds scary, are you okay?", "Don't worry, we'll figure this out together."},
      {"Ugh, that sounds awful.", "That's really unpleasant, I'm sorry you had to deal with it."},
  }};
  return bank;
}

std::string mock_classification(std::string_view user) {
  std::string caption;
  for (std::string_view line : split_lines(user)) {
    if (iequals_prefix(trim(line), "caption:")) caption = std::string(trim(trim(line).substr(8)));
  }
  const AttributeProfile p = Lexicon::builtin().classify(caption);
  json out;
  for (Factor f : kAllFactors) out[std::string(to_string(f))] = p.label(f);
  return out.dump();
}

// Picks voice `draw` among those of the wanted gender, or among all voices
// when none matches (or the gender is unknown).
const VoiceSpec& pick_voice(const VoiceTable& voices, std::uint64_t draw, Gender wanted) {
  const auto& all = voices.voices();
  if (all.empty()) throw Error(Errc::invalid_argument, "voice table is empty");
  std::vector<const VoiceSpec*> matching;
  if (wanted != Gender::unknown) {
    for (const auto& v : all) {
      if (v.gender() == wanted) matching.push_back(&v);
    }
  }
  if (matching.empty()) return all[draw % all.size()];
  return *matching[draw % matching.size()];
}

}  // namespace

std::string_view to_string(Speaker s) { return s == Speaker::A ? "A" : "B"; }

std::optional<Speaker> parse_speaker(std::string_view s) {
  if (s == "A") return Speaker::A;
  if (s == "B") return Speaker::B;
  return std::nullopt;
}

std::string_view to_string(ResponseMode m) {
  switch (m) {
    case ResponseMode::with_captions: return "with_captions";
    case ResponseMode::without_captions: return "without_captions";
    case ResponseMode::random_attributes: return "random_attributes";
  }
  return "with_captions";
}

std::optional<ResponseMode> parse_mode(std::string_view s) {
  for (auto m : {ResponseMode::with_captions, ResponseMode::without_captions,
                 ResponseMode::random_attributes}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

ChatConfig ChatConfig::from_env() {
  ChatConfig c;
  if (const char* e = std::getenv("PERCEPT_LLM_ENDPOINT")) c.endpoint = e;
  if (const char* k = std::getenv("PERCEPT_LLM_KEY")) c.api_key = k;
  return c;
}

void ChatConfig::validate() const {
  if (retries < 0) throw Error(Errc::invalid_argument, "retry count must be >= 0");
  if (!(timeout_s > 0.0)) throw Error(Errc::invalid_argument, "timeout must be positive");
  if (endpoint.empty()) throw Error(Errc::invalid_argument, "chat endpoint not configured (PERCEPT_LLM_ENDPOINT)");
}

const PromptTemplates& PromptTemplates::builtin() {
  static const PromptTemplates t{
      "You are an empathetic conversation partner. Each utterance in the dialogue below is "
      "annotated, in parentheses, with a caption describing how it was spoken: the speaker's "
      "gender, emotion, pitch, speed and energy. Read the words together with how they were "
      "said to work out what each speaker really means, then continue the conversation with a "
      "reply that fits both.",
      "Reply as speaker {next_speaker}. Answer with exactly two lines and nothing else:\n"
      "CONTENT: <what speaker {next_speaker} says next>\n"
      "CAPTION: <one sentence describing how speaker {next_speaker} says it, covering gender, "
      "emotion, pitch, speed and energy>",
      "You are an empathetic conversation partner. Continue the dialogue below with a reply "
      "that fits what has been said.",
      "Reply as speaker {next_speaker}. Answer with exactly one line and nothing else:\n"
      "CONTENT: <what speaker {next_speaker} says next>",
  };
  return t;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open prompt templates " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(Errc::parse, "prompt templates: " + std::string(e.what()));
  }
  PromptTemplates t = builtin();
  const auto take = [&](const char* key, std::string& field) {
    if (j.contains(key)) field = j.at(key).get<std::string>();
  };
  take("system_with_captions", t.system_with_captions);
  take("instruction_with_captions", t.instruction_with_captions);
  take("system_without_captions", t.system_without_captions);
  take("instruction_without_captions", t.instruction_without_captions);
  return t;
}

Prompt build_prompt_with_captions(std::span<const DialogueTurn> history,
                                  const PromptOptions& options) {
  const auto turns = recent(history, options.max_turns);
  std::string user(kHistoryHeader);
  user += '\n';
  for (std::size_t i = 0; i < turns.size(); ++i) {
    const auto& t = turns[i];
    if (!t.caption) {
      throw Error(Errc::invalid_argument, "turn " + std::to_string(i) + " has no caption");
    }
    user += std::string(to_string(t.speaker)) + " (" + one_line(t.caption->text) + "): " +
            one_line(t.transcript) + "\n";
  }
  const std::string next(to_string(other(turns.back().speaker)));
  user += "\n" + substitute(options.templates->instruction_with_captions, "{next_speaker}", next);
  return {options.templates->system_with_captions, std::move(user)};
}

Prompt build_prompt_without_captions(std::span<const DialogueTurn> history,
                                     const PromptOptions& options) {
  const auto turns = recent(history, options.max_turns);
  std::string user(kHistoryHeader);
  user += '\n';
  for (const auto& t : turns) {
    user += std::string(to_string(t.speaker)) + ": " + one_line(t.transcript) + "\n";
  }
  const std::string next(to_string(other(turns.back().speaker)));
  user += "\n" + substitute(options.templates->instruction_without_captions, "{next_speaker}", next);
  return {options.templates->system_without_captions, std::move(user)};
}

ParsedReply parse_response(std::string_view raw) {
  const LabelledFields f = scan_labels(raw);
  if (!f.content || f.content->empty() || !f.caption || f.caption->empty()) {
    throw Error(Errc::parse, "reply lacks CONTENT:/CAPTION: fields; raw reply was: " +
                                 std::string(raw));
  }
  return {*f.content, *f.caption};
}

std::string parse_content(std::string_view raw) {
  const LabelledFields f = scan_labels(raw);
  std::string content = f.content ? *f.content : one_line(raw);
  if (content.empty()) throw Error(Errc::parse, "empty reply; raw reply was: " + std::string(raw));
  return content;
}

std::string chat(const Prompt& prompt, const ChatConfig& config) {
  config.validate();
  json body = {{"model", config.model},
               {"temperature", config.temperature},
               {"max_tokens", config.max_tokens},
               {"messages",
                json::array({{{"role", "system"}, {"content", prompt.system}},
                             {{"role", "user"}, {"content", prompt.user}}})}};
  std::map<std::string, std::string> headers;
  if (!config.api_key.empty()) headers["Authorization"] = "Bearer " + config.api_key;
  const http::RetryPolicy policy{config.retries, config.initial_backoff, config.timeout_s};
  const http::Response res =
      http::post_with_retry(config.endpoint, body.dump(), "application/json", headers, policy);
  try {
    const json reply = json::parse(res.body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_response,
                "chat reply is not a chat-completions body (" + std::string(e.what()) + ")");
  }
}

AttributeProfile empathetic_mirror(const AttributeProfile& last, Gender respondent) {
  AttributeProfile p = last;
  p.gender = respondent;
  return p;
}

MockChatBackend MockChatBackend::canned(std::string reply) {
  MockChatBackend m;
  m.canned_ = std::move(reply);
  return m;
}

std::string MockChatBackend::complete(const Prompt& prompt) const {
  if (canned_) return *canned_;
  if (prompt.user.find(kClassifyMarker) != std::string::npos) return mock_classification(prompt.user);
  for (const auto& marker : malformed_markers_) {
    if (prompt.user.find(marker) != std::string::npos) return "Sure, sounds fun!";
  }
  const auto turns = history_from_prompt(prompt.user);
  if (turns.empty()) return "Sure, sounds fun!";

  const PromptTurn& last = turns.back();
  const std::uint64_t h = stable_hash(prompt.user);
  const bool wants_caption = prompt.user.find("CAPTION:") != std::string::npos;
  if (!wants_caption || !last.caption) {
    const auto& bank = reply_bank()[0];
    return "CONTENT: " + std::string(bank[h % bank.size()]);
  }

  const AttributeProfile heard = Lexicon::builtin().classify(*last.caption);
  Gender respondent = Gender::female;
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->speaker != last.speaker && it->caption) {
      const Gender g = Lexicon::builtin().classify(*it->caption).gender;
      if (g != Gender::unknown) {
        respondent = g;
        break;
      }
    }
  }
  const AttributeProfile reply = empathetic_mirror(heard, respondent);
  const auto& bank = reply_bank()[static_cast<std::size_t>(reply.emotion)];
  const Caption caption = generate_caption(reply, InstructionBank::builtin(), h);
  return "CONTENT: " + std::string(bank[h % bank.size()]) + "\nCAPTION: " + caption.text;
}

AttributeProfile LlmCaptionClassifier::classify(std::string_view caption) const {
  if (trim(caption).empty()) throw Error(Errc::invalid_argument, "caption text is empty");
  Prompt p;
  p.system = "You label speaking-style captions.";
  p.user = std::string(kClassifyMarker) +
           " with keys gender (male|female|unknown), emotion (neutral|happy|sad|angry|surprise|"
           "fear|disgust), pitch (low|neutral|high), speed (slow|neutral|fast) and energy "
           "(low|neutral|high) describing the caption below. Use neutral (unknown for gender) "
           "when the caption does not say.\nCaption: " +
           one_line(caption);
  const std::string raw = backend_->complete(p);
  const auto open = raw.find('{');
  const auto close = raw.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) {
    throw Error(Errc::malformed_response, "classifier reply has no JSON object: " + raw);
  }
  AttributeProfile out;
  try {
    const json j = json::parse(raw.substr(open, close - open + 1));
    const auto field = [&](Factor f) -> std::string {
      const auto key = std::string(to_string(f));
      return j.contains(key) ? j.at(key).get<std::string>() : std::string();
    };
    out.gender = parse_gender(field(Factor::gender)).value_or(Gender::unknown);
    out.emotion = parse_emotion(field(Factor::emotion)).value_or(Emotion::neutral);
    out.pitch = parse_level(field(Factor::pitch)).value_or(Level::neutral);
    out.speed = parse_level(field(Factor::speed)).value_or(Level::neutral);
    out.energy = parse_level(field(Factor::energy)).value_or(Level::neutral);
  } catch (const json::exception& e) {
    throw Error(Errc::malformed_response, "classifier reply: " + std::string(e.what()));
  }
  return out;
}

ResponsePlan plan_response(std::span<const DialogueTurn> history, ResponseMode mode,
                           const PlanContext& ctx, std::uint64_t seed) {
  if (ctx.backend == nullptr) throw Error(Errc::invalid_argument, "no chat backend configured");
  const LexiconClassifier lexicon;
  const CaptionClassifier& classifier = ctx.classifier ? *ctx.classifier : lexicon;

  SeededRng rng(derive_seed(seed, "plan"));
  const std::uint64_t voice_draw = rng.next();
  const VoiceSpec& voice = pick_voice(*ctx.voices, voice_draw, Gender::unknown);

  ResponsePlan plan;
  plan.voice_id = voice.voice_id;
  switch (mode) {
    case ResponseMode::with_captions: {
      const ParsedReply reply =
          parse_response(ctx.backend->complete(build_prompt_with_captions(history, ctx.prompt)));
      plan.content = reply.content;
      plan.response_caption = reply.caption;
      plan.attributes = classifier.classify(reply.caption);
      plan.voice_id = pick_voice(*ctx.voices, voice_draw, plan.attributes.gender).voice_id;
      return plan;
    }
    case ResponseMode::without_captions: {
      plan.content =
          parse_content(ctx.backend->complete(build_prompt_without_captions(history, ctx.prompt)));
      plan.attributes = AttributeProfile{voice.gender(), Emotion::neutral, Level::neutral,
                                         Level::neutral, Level::neutral};
      break;
    }
    case ResponseMode::random_attributes: {
      const ParsedReply reply =
          parse_response(ctx.backend->complete(build_prompt_with_captions(history, ctx.prompt)));
      plan.content = reply.content;
      plan.attributes.gender = voice.gender();
      plan.attributes.pitch = kAllLevels[rng.index(kAllLevels.size())];
      plan.attributes.speed = kAllLevels[rng.index(kAllLevels.size())];
      plan.attributes.energy = kAllLevels[rng.index(kAllLevels.size())];
      plan.attributes.emotion = kAllEmotions[rng.index(kAllEmotions.size())];
      break;
    }
  }
  // The LLM caption is not used in these modes; describe the applied labels instead.
  plan.response_caption = generate_caption(plan.attributes, *ctx.bank, rng.next()).text;
  return plan;
}

}  // namespace percept
