// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#include "percept/voice.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "percept/error.hpp"

namespace percept {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

VoiceTable::VoiceTable(std::vector<VoiceSpec> voices) : voices_(std::move(voices)) {
  if (voices_.empty()) throw Error(Errc::invalid_argument, "voice table is empty");
  for (const auto& v : voices_) {
    if (v.voice_id.empty()) throw Error(Errc::invariant_violation, "voice with empty id");
    if (v.base_f0_hz < 60.0 || v.base_f0_hz > 400.0) {
      throw Error(Errc::invariant_violation, "voice '" + v.voice_id + "' base F0 outside [60, 400] Hz");
    }
  }
}

VoiceTable VoiceTable::parse(std::string_view text) {
  std::vector<VoiceSpec> voices;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fail = [&](const std::string& why) {
      return Error(Errc::parse, "voice table line " + std::to_string(line_no) + ": " + why);
    };
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
    if (t2 == std::string_view::npos) throw fail("expected 'voice_id<TAB>base_f0_hz<TAB>backend'");
    VoiceSpec v;
    v.voice_id = std::string(trim(line.substr(0, t1)));
    const std::string_view f0 = trim(line.substr(t1 + 1, t2 - t1 - 1));
    const auto [ptr, ec] = std::from_chars(f0.data(), f0.data() + f0.size(), v.base_f0_hz);
    if (ec != std::errc{} || ptr != f0.data() + f0.size()) throw fail("bad base_f0_hz");
    const std::string_view backend = trim(line.substr(t2 + 1));
    if (backend == "mock") {
      v.backend = VoiceBackend::mock;
    } else if (backend == "remote") {
      v.backend = VoiceBackend::remote;
    } else {
      throw fail("backend must be mock or remote");
    }
    voices.push_back(std::move(v));
  }
  return VoiceTable(std::move(voices));
}

VoiceTable VoiceTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open voice table " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const VoiceTable& VoiceTable::builtin() {
  static const VoiceTable table = parse("male_low\t110\tmock\nfemale_high\t240\tmock\n");
  return table;
}

const VoiceSpec& VoiceTable::at(std::string_view voice_id) const {
  for (const auto& v : voices_) {
    if (v.voice_id == voice_id) return v;
  }
  throw Error(Errc::not_found, "unknown voice '" + std::string(voice_id) + "'");
}

std::string VoiceTable::to_text() const {
  std::ostringstream out;
  for (const auto& v : voices_) {
    out << v.voice_id << '\t' << v.base_f0_hz << '\t'
        << (v.backend == VoiceBackend::mock ? "mock" : "remote") << '\n';
  }
  return out.str();
}

}  // namespace percept
