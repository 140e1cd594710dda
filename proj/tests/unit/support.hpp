// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "svtk/contour.hpp"
#include "svtk/matrix.hpp"

namespace svtk::test {

// Fresh directory per call; removed when the object dies.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("svtk_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols,
                            double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (auto& v : m.data()) v = u(rng);
  return m;
}

inline F0Contour voiced_contour(std::initializer_list<double> hz, double hop = 0.01) {
  std::vector<F0Frame> frames;
  for (double f : hz) frames.push_back(f > 0 ? F0Frame{f, true} : F0Frame{0.0, false});
  return F0Contour(std::move(frames), hop);
}

}  // namespace svtk::test
