// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/contour.hpp"

#include <cmath>
#include <string>

#include "svtk/error.hpp"
#include "svtk/matrix.hpp"

namespace svtk {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw DomainError("matrix data size " + std::to_string(data_.size()) + " does not match " +
                      std::to_string(rows) + "x" + std::to_string(cols));
  }
}

F0Contour::F0Contour(std::vector<F0Frame> frames, double hop_s, int sample_rate, double start_s)
    : frames_(std::move(frames)), hop_s_(hop_s), sample_rate_(sample_rate), start_s_(start_s) {
  if (!(hop_s_ > 0.0) || !std::isfinite(hop_s_)) {
    throw DomainError("contour hop must be positive");
  }
  if (sample_rate_ < 0 || !std::isfinite(start_s_)) {
    throw DomainError("invalid contour metadata");
  }
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    const auto& f = frames_[i];
    if (f.voiced) {
      if (!std::isfinite(f.f0_hz) || f.f0_hz <= 0.0) {
        throw DomainError("voiced frame " + std::to_string(i) + " has non-positive f0");
      }
    } else if (f.f0_hz != 0.0) {
      throw DomainError("unvoiced frame " + std::to_string(i) + " must store f0 = 0");
    }
  }
}

std::size_t F0Contour::voiced_count() const {
  std::size_t n = 0;
  for (const auto& f : frames_) n += f.voiced ? 1 : 0;
  return n;
}

std::vector<double> F0Contour::voiced_f0() const {
  std::vector<double> out;
  out.reserve(frames_.size());
  for (const auto& f : frames_) {
    if (f.voiced) out.push_back(f.f0_hz);
  }
  return out;
}

F0Contour F0Contour::with_frames(std::vector<F0Frame> frames) const {
  return F0Contour(std::move(frames), hop_s_, sample_rate_, start_s_);
}

}  // namespace svtk
