// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/psola.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "svtk/error.hpp"

namespace svtk {

MarkConfig MarkConfig::from(const PitchConfig& cfg) {
  MarkConfig m;
  m.floor_hz = cfg.floor_hz;
  m.ceiling_hz = cfg.ceiling_hz;
  return m;
}

void FlattenTarget::validate() const {
  if (mode == FlattenMode::fixed_hz && !(value_hz >= 40.0 && value_hz <= 1000.0)) {
    throw DomainError("fixed flatten target must lie in [40, 1000] Hz");
  }
}

namespace {

struct Run {
  std::size_t first;  // frame or mark index, inclusive
  std::size_t last;
};

std::vector<Run> voiced_frame_runs(const F0Contour& contour) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < contour.size(); ++i) {
    if (!contour[i].voiced) continue;
    if (!runs.empty() && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }
  return runs;
}

// Sample position of the centre of contour frame i.
double frame_centre(const F0Contour& contour, std::size_t i, double fs) {
  return contour.time_s(i) * fs;
}

std::size_t nearest_frame(const F0Contour& contour, double sample, double fs) {
  const double k = std::round((sample / fs - contour.start_s()) / contour.hop_s());
  if (k <= 0.0) return 0;
  return std::min(contour.size() - 1, static_cast<std::size_t>(k));
}

std::size_t argmax(std::span<const double> x, std::size_t lo, std::size_t hi, double sign) {
  std::size_t best = lo;
  for (std::size_t i = lo + 1; i <= hi; ++i) {
    if (sign * x[i] > sign * x[best]) best = i;
  }
  return best;
}

}  // namespace

PitchMarks find_pitch_marks(const AudioBuffer& audio, const F0Contour& contour,
                            const MarkConfig& cfg) {
  PitchMarks marks;
  if (contour.empty() || audio.empty()) return marks;

  const double fs = audio.sample_rate();
  const auto x = audio.samples();
  const auto len = audio.size();
  const double half_hop = contour.hop_s() * fs / 2.0;
  const auto unvoiced_step = std::max<std::size_t>(1, ms_to_samples(cfg.unvoiced_step_ms,
                                                                    audio.sample_rate()));
  const auto min_spacing = static_cast<std::size_t>(std::ceil(fs / cfg.ceiling_hz));
  const auto max_spacing = static_cast<std::size_t>(std::floor(fs / cfg.floor_hz));

  const auto to_sample = [&](double s) {
    return static_cast<std::size_t>(std::clamp(std::ceil(s), 0.0, static_cast<double>(len)));
  };
  const auto add_unvoiced = [&](std::size_t from, std::size_t to) {
    for (std::size_t p = from; p < to; p += unvoiced_step) {
      marks.positions.push_back(p);
      marks.voiced.push_back(0);
    }
  };

  std::size_t cursor = 0;
  for (const auto& run : voiced_frame_runs(contour)) {
    const auto begin = to_sample(frame_centre(contour, run.first, fs) - half_hop);
    const auto end = to_sample(frame_centre(contour, run.last, fs) + half_hop);
    if (begin >= end) continue;
    add_unvoiced(cursor, begin);
    cursor = end;

    double hi_val = 0.0;
    double lo_val = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      hi_val = std::max(hi_val, x[i]);
      lo_val = std::min(lo_val, x[i]);
    }
    const double sign = hi_val >= -lo_val ? 1.0 : -1.0;
    const auto period_at = [&](std::size_t n) {
      const auto k = std::clamp(nearest_frame(contour, static_cast<double>(n), fs), run.first, run.last);
      return fs / contour[k].f0_hz;
    };

    // Anchor on the strongest peak of the region, then walk outwards one
    // local period at a time, snapping each mark to the nearby peak.
    const auto anchor = argmax(x, begin, end - 1, sign);
    // Voiced frames overhang the true onset by up to half a window; peaks this
    // weak are noise, and walking into them drags epochs ahead of the onset.
    const double floor_level = cfg.min_peak_ratio * sign * x[anchor];
    std::vector<std::size_t> backward;
    for (std::size_t mark = anchor;;) {
      const double period = period_at(mark);
      const double predicted = static_cast<double>(mark) - period;
      const double radius = cfg.snap_fraction * period;
      const double lo_d = std::max(predicted - radius, static_cast<double>(mark) - max_spacing);
      const double hi_d = std::min(predicted + radius, static_cast<double>(mark) - min_spacing);
      if (hi_d < static_cast<double>(begin)) break;
      const bool clipped = lo_d < static_cast<double>(begin);
      const auto lo = static_cast<std::size_t>(std::ceil(std::max(lo_d, static_cast<double>(begin))));
      const auto hi = static_cast<std::size_t>(std::floor(hi_d));
      if (hi < lo) break;
      mark = argmax(x, lo, hi, sign);
      if (clipped && mark == lo) break;
      if (sign * x[mark] < floor_level) break;
      backward.push_back(mark);
    }
    for (auto it = backward.rbegin(); it != backward.rend(); ++it) {
      marks.positions.push_back(*it);
      marks.voiced.push_back(1);
    }
    marks.positions.push_back(anchor);
    marks.voiced.push_back(1);
    for (std::size_t mark = anchor;;) {
      const double period = period_at(mark);
      const double predicted = static_cast<double>(mark) + period;
      const double radius = cfg.snap_fraction * period;
      auto lo = static_cast<std::size_t>(std::ceil(predicted - radius));
      auto hi = static_cast<std::size_t>(std::floor(predicted + radius));
      lo = std::max(lo, mark + min_spacing);
      hi = std::min(hi, mark + max_spacing);
      if (lo >= end) break;
      const bool clipped = hi > end - 1;
      hi = std::min(hi, end - 1);
      if (hi < lo) break;
      mark = argmax(x, lo, hi, sign);
      // A maximum on a cut-off window edge is the slope of a peak outside the region.
      if (clipped && mark == hi) break;
      if (sign * x[mark] < floor_level) break;
      marks.positions.push_back(mark);
      marks.voiced.push_back(1);
    }
  }
  add_unvoiced(cursor, len);
  return marks;
}

double resolve_target_hz(const FlattenTarget& target, std::span<const F0Contour> contours) {
  target.validate();
  if (target.mode == FlattenMode::fixed_hz) return target.value_hz;
  std::vector<double> f0;
  for (const auto& c : contours) {
    const auto v = c.voiced_f0();
    f0.insert(f0.end(), v.begin(), v.end());
  }
  if (f0.empty()) throw DomainError("no voiced frames to derive a flatten target from");
  std::sort(f0.begin(), f0.end());
  if (target.mode == FlattenMode::speaker_median) {
    const auto mid = f0.size() / 2;
    return f0.size() % 2 == 1 ? f0[mid] : 0.5 * (f0[mid - 1] + f0[mid]);
  }
  double sum = 0.0;
  for (double v : f0) sum += v;
  return sum / static_cast<double>(f0.size());
}

AudioBuffer resynthesize(const AudioBuffer& audio, const PitchMarks& marks,
                         const F0Contour& target_contour) {
  if (marks.positions.size() != marks.voiced.size()) {
    throw DomainError("pitch marks have mismatched position and voicing counts");
  }
  for (std::size_t i = 0; i < target_contour.size(); ++i) {
    const auto& f = target_contour[i];
    if (f.voiced && !(f.f0_hz >= 40.0 && f.f0_hz <= 1000.0)) {
      throw DomainError("target f0 " + std::to_string(f.f0_hz) + " Hz at frame " +
                        std::to_string(i) + " is outside [40, 1000] Hz");
    }
  }

  const auto x = audio.samples();
  std::vector<double> out(x.begin(), x.end());
  const double fs = audio.sample_rate();
  const auto len = static_cast<long long>(x.size());
  const auto& pos = marks.positions;

  std::vector<Run> runs;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    if (!marks.voiced[i]) continue;
    if (!runs.empty() && runs.back().last + 1 == i) {
      runs.back().last = i;
    } else {
      runs.push_back({i, i});
    }
  }

  for (const auto& run : runs) {
    if (run.last == run.first) continue;

    const auto local_period = [&](std::size_t k) {
      const std::size_t a = k > run.first ? k - 1 : k;
      const std::size_t b = k < run.last ? k + 1 : k;
      return static_cast<double>(pos[b] - pos[a]) / static_cast<double>(b - a);
    };

    // Synthesis epochs, pinned to the first analysis mark and never past the last.
    const double first = static_cast<double>(pos[run.first]);
    const double last = static_cast<double>(pos[run.last]);
    std::vector<double> epochs{first};
    std::size_t nearest = run.first;
    for (double t = first;;) {
      while (nearest < run.last && std::abs(static_cast<double>(pos[nearest + 1]) - t) <
                                       std::abs(static_cast<double>(pos[nearest]) - t)) {
        ++nearest;
      }
      double period = local_period(nearest);
      if (!target_contour.empty()) {
        const auto& f = target_contour[nearest_frame(target_contour, t, fs)];
        if (f.voiced) period = fs / f.f0_hz;
      }
      t += period;
      if (t > last + 0.5) break;
      epochs.push_back(t);
    }

    const auto pad = static_cast<long long>(
        std::ceil(std::max(local_period(run.first), local_period(run.last)) * 2.0));
    const long long span_lo = std::max(0LL, static_cast<long long>(first) - pad);
    const long long span_hi = std::min(len, static_cast<long long>(last) + pad + 1);
    const auto span_len = static_cast<std::size_t>(span_hi - span_lo);
    std::vector<double> acc(span_len, 0.0);
    std::vector<double> weight(span_len, 0.0);

    std::size_t k = run.first;
    for (double t : epochs) {
      // Nearest analysis mark, ties to the earlier one.
      while (k < run.last && std::abs(static_cast<double>(pos[k + 1]) - t) <
                                 std::abs(static_cast<double>(pos[k]) - t)) {
        ++k;
      }
      const auto half = std::max(1LL, std::llround(local_period(k)));
      const auto centre = std::llround(t);
      const auto src = static_cast<long long>(pos[k]);
      for (long long j = -half; j <= half; ++j) {
        const long long dst = centre + j;
        const long long from = src + j;
        if (dst < span_lo || dst >= span_hi || from < 0 || from >= len) continue;
        const double w =
            0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(j) / static_cast<double>(half)));
        const auto d = static_cast<std::size_t>(dst - span_lo);
        acc[d] += w * x[static_cast<std::size_t>(from)];
        weight[d] += w;
      }
    }

    const auto first_i = static_cast<long long>(pos[run.first]);
    const auto last_i = static_cast<long long>(pos[run.last]);
    for (long long n = span_lo; n < span_hi; ++n) {
      const auto d = static_cast<std::size_t>(n - span_lo);
      const double w = weight[d];
      const double v = w > 1.0 ? acc[d] / w : acc[d];
      if (n >= first_i && n <= last_i) {
        out[static_cast<std::size_t>(n)] = v;
      } else if (w > 0.0) {
        // Outside the run, fade from the rebuilt signal back to the input.
        out[static_cast<std::size_t>(n)] = v + std::max(0.0, 1.0 - w) * x[static_cast<std::size_t>(n)];
      }
    }
  }
  return AudioBuffer::clipped_from(std::move(out), audio.sample_rate());
}

AudioBuffer flatten_pitch_to(const AudioBuffer& audio, const F0Contour& contour, double target_hz,
                             const MarkConfig& mark_cfg) {
  FlattenTarget::fixed(target_hz).validate();
  const auto marks = find_pitch_marks(audio, contour, mark_cfg);
  std::vector<F0Frame> frames(contour.frames().begin(), contour.frames().end());
  for (auto& f : frames) {
    if (f.voiced) f.f0_hz = target_hz;
  }
  return resynthesize(audio, marks, contour.with_frames(std::move(frames)));
}

AudioBuffer flatten_pitch(const AudioBuffer& audio, const F0Contour& contour,
                          const FlattenTarget& target, const MarkConfig& mark_cfg) {
  const double hz = resolve_target_hz(target, std::span<const F0Contour>(&contour, 1));
  return flatten_pitch_to(audio, contour, hz, mark_cfg);
}

}  // namespace svtk
