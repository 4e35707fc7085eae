// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "percept/attributes.hpp"
#include "percept/prosody.hpp"

namespace percept {

struct FfeOptions {
  /// Count voicing-decision mismatches as errors. Off reproduces the
  /// pitch-only reading (only gross pitch deviations count).
  bool voicing_errors = true;
  double threshold = 0.20;
};

struct FfeCounts {
  std::size_t errors = 0;
  std::size_t frames = 0;  // common (truncated) frame count
  double fraction() const { return frames ? static_cast<double>(errors) / static_cast<double>(frames) : 0.0; }
};

/// F0 frame error of `candidate` against `reference`. Both tracks must share
/// grid parameters; they are truncated to the shorter one. A frame is wrong
/// when the voicing flags differ, or both are voiced and
/// |f0_c - f0_r| / f0_r exceeds the threshold.
FfeCounts ffe_counts(const ProsodyTrack& reference, const ProsodyTrack& candidate,
                     const FfeOptions& options = {});
double ffe(const ProsodyTrack& reference, const ProsodyTrack& candidate,
           const FfeOptions& options = {});

struct AccuracyReport {
  std::map<Factor, double> per_factor;
  double overall = 0.0;
};

AccuracyReport attribute_accuracy(std::span<const AttributeProfile> predictions,
                                  std::span<const AttributeProfile> truths,
                                  std::span<const Factor> factors);

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Support-weighted precision/recall/F1 over the classes present in truths.
PrecisionRecallF1 weighted_prf(std::span<const std::string> predictions,
                               std::span<const std::string> truths);

/// Content similarity in [0, 1] between a candidate and a reference sentence.
class SimilarityBackend {
 public:
  virtual ~SimilarityBackend() = default;
  virtual double similarity(std::string_view candidate, std::string_view reference) const = 0;
  virtual std::string name() const = 0;
};

/// Lower-cased whitespace tokens, multiset precision/recall, F1.
class TokenF1Similarity final : public SimilarityBackend {
 public:
  double similarity(std::string_view candidate, std::string_view reference) const override;
  std::string name() const override { return "token-f1"; }
};

using TokenVectors = std::unordered_map<std::string, std::vector<double>>;

/// Word-vector text format: `token v1 v2 ... vd` per line (an optional
/// leading "count dim" header line is skipped).
TokenVectors load_token_vectors(const std::filesystem::path& path);

/// Greedy cosine matching over token vectors; F1 of the two directional
/// means, clamped to [0, 1]. Tokens without a vector only match themselves.
class EmbeddingSimilarity final : public SimilarityBackend {
 public:
  explicit EmbeddingSimilarity(TokenVectors vectors) : vectors_(std::move(vectors)) {}
  double similarity(std::string_view candidate, std::string_view reference) const override;
  std::string name() const override { return "embedding"; }

 private:
  TokenVectors vectors_;
};

double content_similarity(std::string_view candidate, std::string_view reference);

/// Lower-cased whitespace split used by TokenF1Similarity.
std::vector<std::string> whitespace_tokens(std::string_view text);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

/// Population standard deviation; zeros for an empty input.
MeanStd mean_std(std::span<const double> values);

}  // namespace percept
