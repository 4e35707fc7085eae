// Copyright 2026 The Percept Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "percept/audio.hpp"
#include "percept/error.hpp"

namespace percept::testing {

inline AudioClip tone(double hz, double seconds, int rate = 16000, double amp = 0.5) {
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return AudioClip(std::move(s), rate);
}

inline AudioClip noise(std::uint64_t seed, double seconds, int rate = 16000, double sd = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sd);
  const auto n = static_cast<std::size_t>(std::llround(seconds * rate));
  std::vector<double> s(n);
  for (double& v : s) v = std::clamp(dist(rng), -1.0, 1.0);
  return AudioClip(std::move(s), rate);
}

inline double rms(const AudioClip& c) {
  double acc = 0.0;
  for (double v : c.samples()) acc += v * v;
  return c.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(c.size()));
}

// Fresh scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("percept-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

template <typename Fn>
Errc error_code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected percept::Error");
}

}  // namespace percept::testing
