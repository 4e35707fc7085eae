// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "percept/attributes.hpp"

namespace percept {

enum class VoiceBackend { mock, remote };

struct VoiceSpec {
  std::string voice_id;
  double base_f0_hz = 200.0;  // [60, 400]
  VoiceBackend backend = VoiceBackend::mock;

  /// Heuristic gender of the preset, using the same F0 rule as bin_profile.
  Gender gender(double threshold_hz = 165.0) const {
    return base_f0_hz < threshold_hz ? Gender::male : Gender::female;
  }
};

/// Voice presets. File format: `voice_id TAB base_f0_hz TAB backend` per line.
class VoiceTable {
 public:
  static VoiceTable parse(std::string_view text);
  static VoiceTable load(const std::filesystem::path& path);
  /// One male (110 Hz) and one female (240 Hz) mock preset.
  static const VoiceTable& builtin();

  explicit VoiceTable(std::vector<VoiceSpec> voices);

  const std::vector<VoiceSpec>& voices() const noexcept { return voices_; }
  /// Throws not_found.
  const VoiceSpec& at(std::string_view voice_id) const;
  std::string to_text() const;

 private:
  std::vector<VoiceSpec> voices_;
};

}  // namespace percept
