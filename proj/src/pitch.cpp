// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/pitch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "svtk/error.hpp"

namespace svtk {

void PitchConfig::validate() const {
  if (!(floor_hz >= 40.0 && floor_hz < ceiling_hz && ceiling_hz <= 1000.0)) {
    throw DomainError("pitch range must satisfy 40 <= floor < ceiling <= 1000 Hz");
  }
  if (!(hop_ms > 0.0)) throw DomainError("pitch hop must be positive");
  const auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!unit(silence_threshold) || !unit(voicing_threshold)) {
    throw DomainError("silence and voicing thresholds must lie in (0, 1)");
  }
  if (octave_cost < 0.0 || octave_jump_cost < 0.0 || voiced_unvoiced_cost < 0.0) {
    throw DomainError("path costs must be non-negative");
  }
  if (max_candidates < 2) throw DomainError("max_candidates must be at least 2");
  if (!(periods_per_window >= 1.0)) throw DomainError("periods_per_window must be >= 1");
}

std::size_t PitchConfig::window_samples(int sample_rate) const {
  return static_cast<std::size_t>(std::llround(periods_per_window / floor_hz * sample_rate));
}

std::size_t PitchConfig::hop_samples(int sample_rate) const {
  return std::max<std::size_t>(1, ms_to_samples(hop_ms, sample_rate));
}

namespace {

constexpr double kQuantizationSteps = 8388608.0;  // 2^23

struct Candidate {
  double f0_hz = 0.0;  // 0 = unvoiced
  double strength = 0.0;
};

// Peak-normalized, 24-bit rounded copy of the input.
std::vector<double> canonical_signal(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  std::vector<double> out(x.size(), 0.0);
  if (peak == 0.0) return out;
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = std::nearbyint(x[i] / peak * kQuantizationSteps) / kQuantizationSteps;
  }
  return out;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    w[j] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j + 1) /
                                static_cast<double>(n + 1));
  }
  return w;
}

std::vector<double> autocorrelation(std::span<const double> a, std::size_t max_lag) {
  std::vector<double> r(max_lag + 1, 0.0);
  const std::size_t n = a.size();
  for (std::size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t j = 0; j + lag < n; ++j) acc += a[j] * a[j + lag];
    r[lag] = acc;
  }
  return r;
}

class FrameAnalyzer {
 public:
  FrameAnalyzer(const PitchConfig& cfg, int sample_rate)
      : cfg_(cfg),
        fs_(sample_rate),
        window_(hann(cfg.window_samples(sample_rate))),
        min_lag_(std::max<std::size_t>(2, static_cast<std::size_t>(fs_ / cfg.ceiling_hz))),
        max_lag_(std::min(static_cast<std::size_t>(fs_ / cfg.floor_hz) + 2, window_.size() - 2)) {
    window_ac_ = autocorrelation(window_, max_lag_ + 1);
    const double r0 = window_ac_[0];
    for (auto& v : window_ac_) v /= r0;
    segment_.resize(window_.size());
  }

  std::size_t window_len() const { return window_.size(); }

  // Candidates of the frame centred on `centre`; index 0 is always unvoiced.
  std::vector<Candidate> analyze(std::span<const double> x, long long centre, double global_peak) {
    const auto len = static_cast<long long>(window_.size());
    const long long begin = centre - len / 2;
    const long long lo = std::max(0LL, begin);
    const long long hi = std::min(static_cast<long long>(x.size()), begin + len);

    double mean = 0.0;
    for (long long i = lo; i < hi; ++i) mean += x[static_cast<std::size_t>(i)];
    mean /= static_cast<double>(std::max(1LL, hi - lo));
    double local_peak = 0.0;
    for (long long i = lo; i < hi; ++i) {
      local_peak = std::max(local_peak, std::abs(x[static_cast<std::size_t>(i)] - mean));
    }

    const double intensity = global_peak > 0.0 ? local_peak / global_peak : 0.0;
    const double vt = cfg_.voicing_threshold;
    const double unvoiced_strength =
        vt + std::max(0.0, 2.0 - intensity / (cfg_.silence_threshold / (1.0 + vt)));
    std::vector<Candidate> cands{{0.0, unvoiced_strength}};
    if (local_peak == 0.0) return cands;

    for (long long j = 0; j < len; ++j) {
      const long long i = begin + j;
      const double v = (i >= lo && i < hi) ? x[static_cast<std::size_t>(i)] - mean : 0.0;
      segment_[static_cast<std::size_t>(j)] = v * window_[static_cast<std::size_t>(j)];
    }
    const auto ac = autocorrelation(segment_, max_lag_ + 1);
    if (!(ac[0] > 0.0)) return cands;
    std::vector<double> r(ac.size());
    for (std::size_t lag = 0; lag < ac.size(); ++lag) r[lag] = ac[lag] / (ac[0] * window_ac_[lag]);

    struct Peak {
      double f0_hz;
      double strength;
      double rank;
    };
    std::vector<Peak> peaks;
    for (std::size_t lag = min_lag_; lag <= max_lag_; ++lag) {
      if (!(r[lag] > 0.5 * vt && r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])) continue;
      const double dr = 0.5 * (r[lag + 1] - r[lag - 1]);
      const double d2r = 2.0 * r[lag] - r[lag - 1] - r[lag + 1];
      double offset = 0.0;
      double strength = r[lag];
      if (d2r > 0.0) {
        offset = dr / d2r;
        strength = r[lag] + 0.5 * dr * offset;
      }
      // Short windows can overshoot 1; reflect those values back below it.
      if (strength > 1.0) strength = 1.0 / strength;
      const double period_s = (static_cast<double>(lag) + offset) / fs_;
      const double f0 = 1.0 / period_s;
      if (f0 < cfg_.floor_hz || f0 > cfg_.ceiling_hz) continue;
      const double rank = strength - cfg_.octave_cost * std::log2(cfg_.floor_hz * period_s);
      peaks.push_back({f0, strength, rank});
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Peak& a, const Peak& b) { return a.rank > b.rank; });
    const std::size_t keep = std::min(peaks.size(), cfg_.max_candidates - 1);
    for (std::size_t k = 0; k < keep; ++k) cands.push_back({peaks[k].f0_hz, peaks[k].strength});
    return cands;
  }

 private:
  const PitchConfig& cfg_;
  double fs_;
  std::vector<double> window_;
  std::vector<double> window_ac_;
  std::vector<double> segment_;
  std::size_t min_lag_;
  std::size_t max_lag_;
};

std::vector<F0Frame> viterbi(const std::vector<std::vector<Candidate>>& frames,
                             const PitchConfig& cfg) {
  const std::size_t n = frames.size();
  std::vector<F0Frame> out(n);
  if (n == 0) return out;

  const double step_scale = 0.01 / (cfg.hop_ms / 1000.0);
  const double jump_cost = cfg.octave_jump_cost * step_scale;
  const double vuv_cost = cfg.voiced_unvoiced_cost * step_scale;
  const auto local = [&](const Candidate& c) {
    return c.f0_hz == 0.0 ? c.strength
                          : c.strength - cfg.octave_cost * std::log2(cfg.ceiling_hz / c.f0_hz);
  };

  std::vector<std::vector<double>> score(n);
  std::vector<std::vector<std::size_t>> back(n);
  score[0].resize(frames[0].size());
  back[0].assign(frames[0].size(), 0);
  for (std::size_t c = 0; c < frames[0].size(); ++c) score[0][c] = local(frames[0][c]);

  for (std::size_t i = 1; i < n; ++i) {
    const auto& prev = frames[i - 1];
    const auto& cur = frames[i];
    score[i].assign(cur.size(), -std::numeric_limits<double>::infinity());
    back[i].assign(cur.size(), 0);
    for (std::size_t c = 0; c < cur.size(); ++c) {
      const bool cur_unvoiced = cur[c].f0_hz == 0.0;
      for (std::size_t p = 0; p < prev.size(); ++p) {
        const bool prev_unvoiced = prev[p].f0_hz == 0.0;
        double transition = 0.0;
        if (cur_unvoiced != prev_unvoiced) {
          transition = vuv_cost;
        } else if (!cur_unvoiced) {
          transition = jump_cost * std::abs(std::log2(prev[p].f0_hz / cur[c].f0_hz));
        }
        const double v = score[i - 1][p] - transition;
        if (v > score[i][c]) {
          score[i][c] = v;
          back[i][c] = p;
        }
      }
      score[i][c] += local(cur[c]);
    }
  }

  std::size_t best = 0;
  for (std::size_t c = 1; c < score[n - 1].size(); ++c) {
    if (score[n - 1][c] > score[n - 1][best]) best = c;
  }
  for (std::size_t i = n; i-- > 0;) {
    const auto& cand = frames[i][best];
    out[i] = cand.f0_hz == 0.0 ? F0Frame{0.0, false} : F0Frame{cand.f0_hz, true};
    best = back[i][best];
  }
  return out;
}

}  // namespace

F0Contour track_pitch(const AudioBuffer& audio, const PitchConfig& cfg) {
  cfg.validate();
  const int fs = audio.sample_rate();
  const auto hop = cfg.hop_samples(fs);
  const double hop_s = static_cast<double>(hop) / fs;
  const auto window = cfg.window_samples(fs);
  if (audio.size() < window) return F0Contour({}, hop_s, fs);

  const auto x = canonical_signal(audio.samples());
  double global_mean = 0.0;
  for (double v : x) global_mean += v;
  global_mean /= static_cast<double>(x.size());
  double global_peak = 0.0;
  for (double v : x) global_peak = std::max(global_peak, std::abs(v - global_mean));

  const auto n_frames = centered_frame_count(x.size(), hop);
  FrameAnalyzer analyzer(cfg, fs);
  std::vector<std::vector<Candidate>> candidates(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    candidates[i] = analyzer.analyze(x, static_cast<long long>(i * hop), global_peak);
  }
  return F0Contour(viterbi(candidates, cfg), hop_s, fs);
}

GlobalPitch global_pitch(std::span<const F0Contour> contours, const std::string& speaker_id) {
  if (contours.empty()) throw DomainError("global pitch needs at least one contour");
  // Summing in sorted order makes the result independent of list order.
  std::vector<double> voiced;
  for (const auto& c : contours) {
    for (const auto& f : c.frames()) {
      if (f.voiced) voiced.push_back(f.f0_hz);
    }
  }
  std::sort(voiced.begin(), voiced.end());
  double sum = 0.0;
  for (double v : voiced) sum += v;
  const std::size_t count = voiced.size();
  if (count == 0) {
    throw DomainError("no speech frames: global pitch of speaker '" + speaker_id +
                      "' is undefined without voiced frames");
  }
  return {sum / static_cast<double>(count), count, speaker_id};
}

}  // namespace svtk
