// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "percept/attributes.hpp"
#include "percept/captioner.hpp"
#include "percept/dialogue.hpp"
#include "percept/metrics.hpp"
#include "percept/synthesis.hpp"
#include "percept/voice.hpp"

namespace percept {

struct ManifestDialogue {
  std::string id;
  std::vector<DialogueTurn> turns;  // in turn_index order
};

/// Line-delimited turns: `dialogue_id TAB turn_index TAB speaker TAB
/// transcript [TAB audio_path [TAB emotion]]`. Lines starting with '{' are
/// read as JSON objects with the same field names. Audio paths are resolved
/// against the manifest's directory. At most two speakers per dialogue; the
/// first one seen becomes A.
struct DialogueManifest {
  std::string source_tag;
  std::vector<ManifestDialogue> dialogues;
};

DialogueManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DialogueManifest& manifest, const std::filesystem::path& path);

/// Exact response styles for a manifest: `dialogue_id TAB profile`.
using TruthTable = std::map<std::string, AttributeProfile>;
TruthTable load_truth(const std::filesystem::path& path);
void write_truth(const TruthTable& truth, const std::filesystem::path& path);

/// Calibration persisted as JSON.
std::string calibration_to_json(const Calibration& cal);
Calibration calibration_from_json(std::string_view text);

/// Terciles measured on each voice rendered over the 27 pitch/speed/energy
/// directive combinations with neutral emotion.
Calibration reference_calibration(const VoiceTable& voices, const TtsBackend& tts,
                                  const ProsodyConfig& prosody = {});

struct SyntheticCorpusOptions {
  std::size_t dialogues = 200;
  std::uint64_t seed = 1;
  std::size_t min_history = 1;
  std::size_t max_history = 3;
};

struct SyntheticCorpus {
  DialogueManifest manifest;
  TruthTable truth;  // commanded style of each dialogue's final (reference) turn
};

/// Scripted two-speaker dialogues with commanded styles, rendered through the
/// mock voice and written under `dir` (manifest.tsv, truth.tsv, audio/).
/// The final turn of each dialogue is the reference response; its style
/// mirrors the turn before it.
SyntheticCorpus generate_synthetic_corpus(const SyntheticCorpusOptions& options,
                                          const VoiceTable& voices,
                                          const std::filesystem::path& dir);

struct Backends {
  const ChatBackend* chat = nullptr;
  const TtsBackend* tts = nullptr;
  const CaptionClassifier* classifier = nullptr;  // lexicon when null
  const SimilarityBackend* similarity = nullptr;  // token F1 when null
};

struct RunConfig {
  ResponseMode mode = ResponseMode::with_captions;
  std::uint64_t seed = 7;
  const VoiceTable* voices = &VoiceTable::builtin();
  const InstructionBank* bank = &InstructionBank::builtin();
  Calibration calibration;
  ProsodyConfig prosody;
  FfeOptions ffe;
  PromptOptions prompt;
  /// Style used when a turn cannot be perceived (no audio, or no voiced frames).
  AttributeProfile fallback{Gender::female, Emotion::neutral, Level::neutral, Level::neutral,
                            Level::neutral};
  std::optional<std::filesystem::path> output_dir;  // audio/ is written here when set
  const TruthTable* truth = nullptr;
  int threads = 0;  // 0 = OpenMP default
};

/// Factors scored for attribute recovery (the four the synthesizer controls).
inline constexpr std::array kScoredFactors{Factor::emotion, Factor::pitch, Factor::speed,
                                           Factor::energy};

struct MetricsReport {
  std::string label;  // mode or ablation variant
  std::size_t sample_count = 0;
  std::size_t failed_count = 0;
  std::map<Factor, double> per_factor_accuracy;  // fractions
  std::optional<double> overall_accuracy;
  std::optional<double> content_similarity;
  std::optional<MeanStd> ffe;  // per-utterance mean and std
  std::optional<double> ffe_pooled;
  std::size_t duration_warnings = 0;

  void validate() const;
};

struct DialogueOutcome {
  std::string dialogue_id;
  bool ok = false;
  std::string error;
  std::vector<std::string> history_captions;
  ResponsePlan plan;
  std::optional<AttributeProfile> truth;
  std::vector<Factor> scored;  // factors with a known truth
  AttributeProfile recovered;
  std::optional<double> content_similarity;
  std::optional<FfeCounts> ffe;
  bool duration_warning = false;
  std::optional<std::filesystem::path> audio_path;
};

struct RunResult {
  MetricsReport report;
  std::vector<DialogueOutcome> dialogues;
};

/// Caption history, plan, synthesize, and score each dialogue. Failures are
/// recorded per dialogue and the run continues.
RunResult run_pipeline(const DialogueManifest& manifest, const RunConfig& config,
                       const Backends& backends);

/// Single-factor ablation: plans once in with_captions mode, then realises
/// the full attribute set and each single factor with the rest pinned to
/// neutral. Rows: full, emotion, speed, energy, pitch.
std::vector<RunResult> run_factor_ablation(const DialogueManifest& manifest,
                                           const RunConfig& config, const Backends& backends);

MetricsReport aggregate(std::string label, const std::vector<DialogueOutcome>& outcomes);

enum class ReportFormat { csv, markdown };

std::string format_report(const std::vector<MetricsReport>& reports, ReportFormat format);
void emit_report(const std::vector<MetricsReport>& reports, ReportFormat format,
                 const std::filesystem::path& path);
/// Per-dialogue CSV (id, status, voice, attributes, captions, content, error).
std::string format_dialogues(const std::vector<DialogueOutcome>& outcomes);

/// One parsed report row: column name -> cell text.
using ReportRow = std::map<std::string, std::string>;
std::vector<ReportRow> parse_markdown_report(std::string_view markdown);
std::vector<ReportRow> parse_csv_report(std::string_view csv);

}  // namespace percept
