// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

namespace {

void check_pair(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(Errc::invalid_argument, "prediction and truth lists differ in length (" +
                                            std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
  if (a == 0) throw Error(Errc::insufficient_data, "no samples to score");
}

double f1_of(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return 0.0;
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  return na > 0.0 && nb > 0.0 ? dot / (na * nb) : 0.0;
}

}  // namespace

FfeCounts ffe_counts(const ProsodyTrack& reference, const ProsodyTrack& candidate,
                     const FfeOptions& options) {
  if (reference.grid.frame_length != candidate.grid.frame_length ||
      reference.grid.hop != candidate.grid.hop) {
    throw Error(Errc::invalid_argument, "FFE needs tracks on the same frame grid");
  }
  FfeCounts out;
  out.frames = std::min(reference.f0_hz.size(), candidate.f0_hz.size());
  if (out.frames == 0) throw Error(Errc::insufficient_data, "FFE: tracks share no frames");
  for (std::size_t i = 0; i < out.frames; ++i) {
    const bool rv = reference.voiced[i];
    const bool cv = candidate.voiced[i];
    if (rv != cv) {
      if (options.voicing_errors) ++out.errors;
    } else if (rv) {
      const double dev = std::abs(candidate.f0_hz[i] - reference.f0_hz[i]) / reference.f0_hz[i];
      if (dev > options.threshold) ++out.errors;
    }
  }
  return out;
}

double ffe(const ProsodyTrack& reference, const ProsodyTrack& candidate, const FfeOptions& options) {
  return ffe_counts(reference, candidate, options).fraction();
}

AccuracyReport attribute_accuracy(std::span<const AttributeProfile> predictions,
                                  std::span<const AttributeProfile> truths,
                                  std::span<const Factor> factors) {
  check_pair(predictions.size(), truths.size());
  if (factors.empty()) throw Error(Errc::invalid_argument, "no factors selected");
  AccuracyReport report;
  double sum = 0.0;
  for (Factor f : factors) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      if (predictions[i].index_of(f) == truths[i].index_of(f)) ++hits;
    }
    const double acc = static_cast<double>(hits) / static_cast<double>(predictions.size());
    report.per_factor[f] = acc;
    sum += acc;
  }
  report.overall = sum / static_cast<double>(factors.size());
  return report;
}

PrecisionRecallF1 weighted_prf(std::span<const std::string> predictions,
                               std::span<const std::string> truths) {
  check_pair(predictions.size(), truths.size());
  std::map<std::string, std::size_t> support, predicted, hits;
  for (std::size_t i = 0; i < truths.size(); ++i) {
    ++support[truths[i]];
    ++predicted[predictions[i]];
    if (predictions[i] == truths[i]) ++hits[truths[i]];
  }
  const auto n = static_cast<double>(truths.size());
  PrecisionRecallF1 out;
  for (const auto& [label, sup] : support) {
    const double tp = static_cast<double>(hits[label]);
    const auto pc = predicted.find(label);
    const double p = pc == predicted.end() || pc->second == 0 ? 0.0 : tp / static_cast<double>(pc->second);
    const double r = tp / static_cast<double>(sup);
    const double w = static_cast<double>(sup) / n;
    out.precision += w * p;
    out.recall += w * r;
    out.f1 += w * f1_of(p, r);
  }
  return out;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::istringstream in{std::string(text)};
  for (std::string tok; in >> tok;) {
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

double TokenF1Similarity::similarity(std::string_view candidate, std::string_view reference) const {
  const auto cand = whitespace_tokens(candidate);
  const auto ref = whitespace_tokens(reference);
  if (cand.empty() || ref.empty()) throw Error(Errc::invalid_argument, "content similarity of empty text");
  std::map<std::string, long> counts;
  for (const auto& t : ref) ++counts[t];
  std::size_t common = 0;
  for (const auto& t : cand) {
    if (auto it = counts.find(t); it != counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  const double p = static_cast<double>(common) / static_cast<double>(cand.size());
  const double r = static_cast<double>(common) / static_cast<double>(ref.size());
  return f1_of(p, r);
}

TokenVectors load_token_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open token vectors " + path.string());
  TokenVectors out;
  std::string line;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> v;
    for (double x; ls >> x;) v.push_back(x);
    if (out.empty() && dim == 0 && v.size() == 1) continue;  // "count dim" header
    if (v.empty()) throw Error(Errc::parse, "token vector line without values: " + token);
    if (dim == 0) dim = v.size();
    if (v.size() != dim) throw Error(Errc::parse, "token vector dimension mismatch for " + token);
    out.emplace(std::move(token), std::move(v));
  }
  return out;
}

double EmbeddingSimilarity::similarity(std::string_view candidate, std::string_view reference) const {
  const auto cand = whitespace_tokens(candidate);
  const auto ref = whitespace_tokens(reference);
  if (cand.empty() || ref.empty()) throw Error(Errc::invalid_argument, "content similarity of empty text");
  const auto sim = [&](const std::string& a, const std::string& b) {
    const auto va = vectors_.find(a);
    const auto vb = vectors_.find(b);
    if (va == vectors_.end() || vb == vectors_.end()) return a == b ? 1.0 : 0.0;
    return cosine(va->second, vb->second);
  };
  const auto greedy = [&](const std::vector<std::string>& from, const std::vector<std::string>& to) {
    double total = 0.0;
    for (const auto& a : from) {
      double best = 0.0;
      for (const auto& b : to) best = std::max(best, sim(a, b));
      total += best;
    }
    return total / static_cast<double>(from.size());
  };
  return std::clamp(f1_of(greedy(cand, ref), greedy(ref, cand)), 0.0, 1.0);
}

double content_similarity(std::string_view candidate, std::string_view reference) {
  return TokenF1Similarity().similarity(candidate, reference);
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace percept
