// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "percept/attributes.hpp"
#include "percept/captioner.hpp"
#include "percept/http.hpp"
#include "percept/voice.hpp"

namespace percept {

enum class Speaker { A, B };
std::string_view to_string(Speaker s);
std::optional<Speaker> parse_speaker(std::string_view s);
inline Speaker other(Speaker s) { return s == Speaker::A ? Speaker::B : Speaker::A; }

struct DialogueTurn {
  Speaker speaker = Speaker::A;
  std::string transcript;
  std::optional<Caption> caption;
  std::optional<std::filesystem::path> audio_ref;
  std::optional<Emotion> emotion_truth;
};

struct ResponsePlan {
  std::string content;
  std::string response_caption;
  AttributeProfile attributes;
  std::string voice_id;
};

enum class ResponseMode { with_captions, without_captions, random_attributes };
std::string_view to_string(ResponseMode m);
std::optional<ResponseMode> parse_mode(std::string_view s);

struct ChatConfig {
  std::string endpoint;  // full chat-completions URL
  std::string api_key;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.7;
  int max_tokens = 256;
  int retries = 2;
  double timeout_s = 30.0;
  std::chrono::milliseconds initial_backoff{200};

  /// Reads PERCEPT_LLM_ENDPOINT / PERCEPT_LLM_KEY; other fields keep defaults.
  static ChatConfig from_env();
  void validate() const;
};

/// System message plus user message, as sent over the wire.
struct Prompt {
  std::string system;
  std::string user;

  std::string text() const { return system + "\n\n" + user; }
};

/// Wording of the two prompt variants. `{next_speaker}` is substituted.
struct PromptTemplates {
  std::string system_with_captions;
  std::string instruction_with_captions;
  std::string system_without_captions;
  std::string instruction_without_captions;

  static const PromptTemplates& builtin();
  /// JSON object with the four keys above; missing keys keep the builtin text.
  static PromptTemplates load(const std::filesystem::path& path);
};

struct PromptOptions {
  std::size_t max_turns = 12;
  const PromptTemplates* templates = &PromptTemplates::builtin();
};

inline constexpr std::string_view kHistoryHeader = "Dialogue history:";

Prompt build_prompt_with_captions(std::span<const DialogueTurn> history,
                                  const PromptOptions& options = {});
Prompt build_prompt_without_captions(std::span<const DialogueTurn> history,
                                     const PromptOptions& options = {});

struct ParsedReply {
  std::string content;
  std::string caption;
};

/// Strict two-field parse (CONTENT:/CAPTION:, any case, either order).
ParsedReply parse_response(std::string_view raw);
/// Content-only replies from the caption-free prompt. Accepts a bare reply
/// when no CONTENT: label is present.
std::string parse_content(std::string_view raw);

/// Remote chat-completions call with retries.
std::string chat(const Prompt& prompt, const ChatConfig& config);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const Prompt& prompt) const = 0;
  virtual std::string name() const = 0;
};

class RemoteChatBackend final : public ChatBackend {
 public:
  explicit RemoteChatBackend(ChatConfig config) : config_(std::move(config)) {}
  std::string complete(const Prompt& prompt) const override { return chat(prompt, config_); }
  std::string name() const override { return "remote"; }
  const ChatConfig& config() const noexcept { return config_; }

 private:
  ChatConfig config_;
};

/// Style the empathetic responder adopts toward the last utterance: it
/// mirrors emotion, pitch, speed and energy, speaking in its own gender.
AttributeProfile empathetic_mirror(const AttributeProfile& last, Gender respondent);

/// Deterministic offline stand-in for the LLM. It reads the dialogue
/// history out of the prompt; with captions it classifies the last caption
/// and answers in the mirrored style, without captions it answers in a
/// neutral register. Pure function of the prompt text.
class MockChatBackend final : public ChatBackend {
 public:
  MockChatBackend() = default;
  /// Always answers `reply` verbatim.
  static MockChatBackend canned(std::string reply);

  /// Prompts containing `marker` get an unlabeled (unparseable) reply.
  void add_malformed_marker(std::string marker) { malformed_markers_.push_back(std::move(marker)); }

  std::string complete(const Prompt& prompt) const override;
  std::string name() const override { return "mock"; }

 private:
  std::optional<std::string> canned_;
  std::vector<std::string> malformed_markers_;
};

/// Sentence classifier that asks the chat backend for the five labels as JSON.
class LlmCaptionClassifier final : public CaptionClassifier {
 public:
  explicit LlmCaptionClassifier(const ChatBackend& backend) : backend_(&backend) {}
  AttributeProfile classify(std::string_view caption) const override;

 private:
  const ChatBackend* backend_;
};

struct PlanContext {
  const ChatBackend* backend = nullptr;
  const CaptionClassifier* classifier = nullptr;  // defaults to the lexicon
  const VoiceTable* voices = &VoiceTable::builtin();
  const InstructionBank* bank = &InstructionBank::builtin();
  PromptOptions prompt;
};

ResponsePlan plan_response(std::span<const DialogueTurn> history, ResponseMode mode,
                           const PlanContext& ctx, std::uint64_t seed);

}  // namespace percept
