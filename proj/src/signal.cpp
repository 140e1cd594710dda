// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svtk/error.hpp"

namespace svtk {

namespace {

void check_rate(int sample_rate) {
  if (sample_rate < kMinSampleRate) {
    throw DomainError("sample rate " + std::to_string(sample_rate) + " Hz is below " +
                      std::to_string(kMinSampleRate) + " Hz");
  }
}

void check_finite(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw DomainError("non-finite audio sample at index " + std::to_string(i));
    }
  }
}

}  // namespace

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
  check_rate(sample_rate_);
  check_finite(samples_);
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (std::abs(samples_[i]) > 1.0) {
      throw DomainError("audio sample " + std::to_string(i) + " outside [-1, 1]");
    }
  }
}

AudioBuffer AudioBuffer::clipped_from(std::vector<double> samples, int sample_rate) {
  check_rate(sample_rate);
  check_finite(samples);
  std::size_t clipped = 0;
  for (auto& s : samples) {
    if (s > 1.0 || s < -1.0) {
      s = std::clamp(s, -1.0, 1.0);
      ++clipped;
    }
  }
  AudioBuffer out(std::move(samples), sample_rate);
  out.clipped_ = clipped;
  return out;
}

double AudioBuffer::duration_s() const {
  return static_cast<double>(samples_.size()) / sample_rate_;
}

AudioBuffer AudioBuffer::scaled(double gain) const {
  std::vector<double> out(samples_.begin(), samples_.end());
  for (auto& s : out) s *= gain;
  return AudioBuffer(std::move(out), sample_rate_);
}

FrameGrid FrameGrid::make(std::size_t len, std::size_t hop, std::size_t window_len) {
  if (hop < 1 || window_len < hop) {
    throw DomainError("frame grid requires 1 <= hop <= window");
  }
  FrameGrid g{hop, window_len, 0};
  if (len >= window_len) g.n_frames = (len - window_len) / hop + 1;
  return g;
}

std::size_t ms_to_samples(double ms, int sample_rate) {
  return static_cast<std::size_t>(std::llround(ms * sample_rate / 1000.0));
}

Frames frame(const AudioBuffer& audio, double hop_ms, double window_ms) {
  if (!(hop_ms > 0.0) || window_ms < hop_ms) {
    throw DomainError("frame() requires window_ms >= hop_ms > 0");
  }
  const auto hop = std::max<std::size_t>(1, ms_to_samples(hop_ms, audio.sample_rate()));
  const auto win = std::max(hop, ms_to_samples(window_ms, audio.sample_rate()));
  Frames out{FrameGrid::make(audio.size(), hop, win), {}};
  out.views.reserve(out.grid.n_frames);
  for (std::size_t i = 0; i < out.grid.n_frames; ++i) {
    out.views.push_back(audio.samples().subspan(out.grid.start(i), win));
  }
  return out;
}

std::size_t centered_frame_count(std::size_t n_samples, std::size_t hop) {
  if (n_samples == 0 || hop == 0) return 0;
  return (n_samples - 1) / hop + 1;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

SynthSpec SynthSpec::sine(double hz, double duration_s, double amplitude) {
  SynthSpec s;
  s.kind = SynthKind::sine;
  s.base_hz = hz;
  s.duration_s = duration_s;
  s.amplitude = amplitude;
  return s;
}

SynthSpec SynthSpec::pulse_train(double hz, double duration_s, double amplitude) {
  auto s = sine(hz, duration_s, amplitude);
  s.kind = SynthKind::pulse_train;
  return s;
}

SynthSpec SynthSpec::vibrato(double base_hz, double depth_hz, double rate_hz, double duration_s,
                             double amplitude) {
  auto s = sine(base_hz, duration_s, amplitude);
  s.kind = SynthKind::vibrato;
  s.depth_hz = depth_hz;
  s.rate_hz = rate_hz;
  return s;
}

SynthSpec SynthSpec::glide(double start_hz, double end_hz, double duration_s, double amplitude) {
  SynthSpec s;
  s.kind = SynthKind::glide;
  s.start_hz = start_hz;
  s.end_hz = end_hz;
  s.duration_s = duration_s;
  s.amplitude = amplitude;
  return s;
}

double SynthSpec::f0_at(double t) const {
  switch (kind) {
    case SynthKind::sine:
    case SynthKind::pulse_train:
      return base_hz;
    case SynthKind::vibrato:
      return base_hz + depth_hz * std::sin(2.0 * std::numbers::pi * rate_hz * t);
    case SynthKind::glide:
      return start_hz + (end_hz - start_hz) * t / duration_s;
  }
  return base_hz;
}

namespace {

void validate_spec(const SynthSpec& spec, int sample_rate) {
  if (!(spec.duration_s > 0.0) || !std::isfinite(spec.duration_s)) {
    throw DomainError("synthesis duration must be positive");
  }
  if (!(spec.amplitude >= 0.0 && spec.amplitude <= 1.0)) {
    throw DomainError("synthesis amplitude must lie in [0, 1]");
  }
  double lo = spec.base_hz;
  double hi = spec.base_hz;
  switch (spec.kind) {
    case SynthKind::sine:
    case SynthKind::pulse_train:
      break;
    case SynthKind::vibrato:
      if (spec.depth_hz < 0.0 || !(spec.rate_hz > 0.0)) {
        throw DomainError("vibrato needs depth >= 0 and rate > 0");
      }
      lo = spec.base_hz - spec.depth_hz;
      hi = spec.base_hz + spec.depth_hz;
      break;
    case SynthKind::glide:
      lo = std::min(spec.start_hz, spec.end_hz);
      hi = std::max(spec.start_hz, spec.end_hz);
      break;
  }
  if (!(lo >= 40.0 && hi <= 1000.0)) {
    throw DomainError("synthesis f0 must stay within [40, 1000] Hz");
  }
  if (hi > sample_rate / 8.0) {
    throw DomainError("synthesis f0 " + std::to_string(hi) + " Hz exceeds a quarter of the Nyquist "
                      "frequency at " + std::to_string(sample_rate) + " Hz");
  }
}

}  // namespace

Synthesized synthesize(const SynthSpec& spec, int sample_rate) {
  check_rate(sample_rate);
  validate_spec(spec, sample_rate);

  const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * sample_rate));
  const double fs = sample_rate;
  std::vector<double> x(n, 0.0);

  if (spec.kind == SynthKind::pulse_train) {
    // Raised-cosine bumps of 2 ms, centred where the accumulated phase
    // crosses an integer number of cycles.
    const double width = 0.002 * fs;
    const double half = width / 2.0;
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = spec.f0_at(static_cast<double>(i) / fs);
      const double next = phase + f / fs;
      if (std::floor(next) > std::floor(phase)) {
        const double centre = static_cast<double>(i) + (std::floor(next) - phase) / (next - phase);
        const auto first = static_cast<long long>(std::ceil(centre - half));
        const auto last = static_cast<long long>(std::floor(centre + half));
        for (long long k = std::max(0LL, first); k <= last && k < static_cast<long long>(n); ++k) {
          const double u = (static_cast<double>(k) - centre) / half;
          x[static_cast<std::size_t>(k)] += 0.5 * (1.0 + std::cos(std::numbers::pi * u));
        }
      }
      phase = next;
    }
    for (auto& v : x) v = std::min(v, 1.0) * spec.amplitude;
  } else {
    double phase = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = spec.amplitude * std::sin(2.0 * std::numbers::pi * phase);
      phase += spec.f0_at(static_cast<double>(i) / fs) / fs;
      phase -= std::floor(phase);
    }
  }

  const auto hop = ms_to_samples(kDefaultHopMs, sample_rate);
  const auto n_frames = centered_frame_count(n, hop);
  std::vector<F0Frame> frames(n_frames);
  if (spec.amplitude > 0.0) {
    for (std::size_t k = 0; k < n_frames; ++k) {
      frames[k] = {spec.f0_at(static_cast<double>(k * hop) / fs), true};
    }
  }
  return {AudioBuffer(std::move(x), sample_rate),
          F0Contour(std::move(frames), static_cast<double>(hop) / fs, sample_rate)};
}

}  // namespace svtk
