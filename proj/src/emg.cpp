// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/emg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "svtk/error.hpp"

namespace svtk {

std::string to_string(EmgMode mode) { return mode == EmgMode::voiced ? "voiced" : "silent"; }

EmgMode parse_emg_mode(const std::string& text) {
  if (text == "voiced") return EmgMode::voiced;
  if (text == "silent") return EmgMode::silent;
  throw FormatError("EMG mode must be \"voiced\" or \"silent\", got \"" + text + "\"");
}

void EmgRecording::validate() const {
  if (channels.rows() < 1) throw DomainError("EMG recording has no channels");
  if (sample_rate <= 0) throw DomainError("EMG sample rate must be positive");
  for (std::size_t c = 0; c < channels.rows(); ++c) {
    for (std::size_t n = 0; n < channels.cols(); ++n) {
      if (!std::isfinite(channels(c, n))) {
        throw DataError("non-finite EMG sample in channel " + std::to_string(c) + " at index " +
                        std::to_string(n));
      }
    }
  }
}

void EmgPreprocessConfig::validate(int sample_rate) const {
  if (mains_hz != 50 && mains_hz != 60) throw DomainError("mains frequency must be 50 or 60 Hz");
  if (!(highpass_hz > 0.0 && highpass_hz < mains_hz)) {
    throw DomainError("highpass cutoff must lie in (0, mains_hz)");
  }
  if (notch_harmonics < 0) throw DomainError("notch harmonic count must be non-negative");
  if (!(notch_q > 0.0)) throw DomainError("notch Q must be positive");
  if (!(target_frame_rate > 0.0 && target_frame_rate <= sample_rate)) {
    throw DomainError("target frame rate must lie in (0, sample_rate]");
  }
  if (!(despike_threshold > 0.0)) throw DomainError("despike threshold must be positive");
  if (sample_rate < 2 * mains_hz * notch_harmonics) {
    throw DomainError("sample rate " + std::to_string(sample_rate) +
                      " Hz is too low for the requested mains harmonics");
  }
}

namespace {

// Direct-form II transposed second-order section, a0 normalized to 1.
struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 2> a{};

  static Biquad highpass(double cutoff_hz, double fs) {
    const double w0 = 2.0 * std::numbers::pi * cutoff_hz / fs;
    constexpr double kButterworthQ = 1.0 / std::numbers::sqrt2;
    const double alpha = std::sin(w0) / (2.0 * kButterworthQ);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {{(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0},
            {-2.0 * cw / a0, (1.0 - alpha) / a0}};
  }

  static Biquad notch(double centre_hz, double q, double fs) {
    const double w0 = 2.0 * std::numbers::pi * centre_hz / fs;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double cw = std::cos(w0);
    const double a0 = 1.0 + alpha;
    return {{1.0 / a0, -2.0 * cw / a0, 1.0 / a0}, {-2.0 * cw / a0, (1.0 - alpha) / a0}};
  }

  // Samples for the impulse response to decay by e^-1.
  double time_constant() const {
    const std::complex<double> disc = a[0] * a[0] - 4.0 * a[1];
    const auto root = std::sqrt(disc);
    const double r = std::max(std::abs((-a[0] + root) / 2.0), std::abs((-a[0] - root) / 2.0));
    return r > 0.0 && r < 1.0 ? -1.0 / std::log(r) : 1.0;
  }

  void run(std::vector<double>& x) const {
    if (x.empty()) return;
    // Start in the steady state for a constant input equal to x[0].
    const double gain = (b[0] + b[1] + b[2]) / (1.0 + a[0] + a[1]);
    double z1 = (gain - b[0]) * x[0];
    double z2 = (b[2] - a[1] * gain) * x[0];
    for (auto& v : x) {
      const double in = v;
      const double out = b[0] * in + z1;
      z1 = b[1] * in - a[0] * out + z2;
      z2 = b[2] * in - a[1] * out;
      v = out;
    }
  }
};

// Burg linear-prediction forecast of `count` samples past the end of `x`.
// Reflection coefficients stay inside the unit circle, so the forecast cannot
// grow; a stationary tone is continued almost exactly.
std::vector<double> forecast(std::span<const double> x, std::size_t count) {
  constexpr std::size_t kFitLength = 2048;
  constexpr std::size_t kOrder = 16;
  const std::size_t len = std::min(x.size(), kFitLength);
  const auto seg = x.subspan(x.size() - len);
  double mean = 0.0;
  for (double v : seg) mean += v;
  mean /= static_cast<double>(len);

  std::vector<double> f(len), b(len);
  double energy = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    f[i] = b[i] = seg[i] - mean;
    energy += f[i] * f[i];
  }
  std::vector<double> a{1.0};
  const std::size_t order = std::min(kOrder, len / 4);
  for (std::size_t m = 1; m <= order; ++m) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = m; i < len; ++i) {
      num += f[i] * b[i - 1];
      den += f[i] * f[i] + b[i - 1] * b[i - 1];
    }
    if (!(den > 1e-20 * energy) || energy == 0.0) break;
    const double k = -2.0 * num / den;
    a.push_back(0.0);
    const auto prev = a;
    for (std::size_t j = 1; j <= m; ++j) a[j] = prev[j] + k * prev[m - j];
    for (std::size_t i = len - 1; i >= m; --i) {
      const double fi = f[i];
      f[i] = fi + k * b[i - 1];
      b[i] = b[i - 1] + k * fi;
    }
  }

  const std::size_t p = a.size() - 1;
  std::vector<double> hist(seg.end() - static_cast<std::ptrdiff_t>(std::min(p, len)), seg.end());
  for (auto& v : hist) v -= mean;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    double pred = 0.0;
    for (std::size_t j = 1; j <= p && j <= hist.size(); ++j) pred -= a[j] * hist[hist.size() - j];
    hist.push_back(pred);
    out.push_back(pred + mean);
  }
  return out;
}

// Forward-backward filtering over a signal extended at both ends by linear
// prediction, long enough for the start-up transient to die out. Reflected
// padding would splice a phase-jumped copy of any tone at the edges and ring
// the notch filters.
std::vector<double> filtfilt(const Biquad& f, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return {x.begin(), x.end()};
  const auto pad = static_cast<std::size_t>(std::ceil(8.0 * f.time_constant()));
  const std::vector<double> reversed(x.rbegin(), x.rend());
  const auto head = forecast(reversed, pad);
  const auto tail = forecast(x, pad);
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  ext.insert(ext.end(), head.rbegin(), head.rend());
  ext.insert(ext.end(), x.begin(), x.end());
  ext.insert(ext.end(), tail.begin(), tail.end());

  f.run(ext);
  std::reverse(ext.begin(), ext.end());
  f.run(ext);
  std::reverse(ext.begin(), ext.end());
  return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
          ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

double median_of(std::vector<double> v) {
  const auto mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

std::vector<double> filter_channel(std::span<const double> x, int sample_rate,
                                   const EmgPreprocessConfig& cfg) {
  cfg.validate(sample_rate);
  const double fs = sample_rate;
  auto y = filtfilt(Biquad::highpass(cfg.highpass_hz, fs), x);
  for (int h = 1; h <= cfg.notch_harmonics; ++h) {
    const double centre = static_cast<double>(cfg.mains_hz) * h;
    if (centre >= fs / 2.0) break;
    y = filtfilt(Biquad::notch(centre, cfg.notch_q, fs), y);
  }
  return y;
}

std::size_t despike(std::vector<double>& x, double threshold) {
  if (x.empty()) return 0;
  const double med = median_of(x);
  std::vector<double> dev(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::abs(x[i] - med);
  const double limit = threshold * 1.4826 * median_of(std::move(dev));
  std::size_t clipped = 0;
  for (auto& v : x) {
    if (v > med + limit) {
      v = med + limit;
      ++clipped;
    } else if (v < med - limit) {
      v = med - limit;
      ++clipped;
    }
  }
  return clipped;
}

ConditionedEmg condition(const EmgRecording& rec, const EmgPreprocessConfig& cfg) {
  rec.validate();
  cfg.validate(rec.sample_rate);
  const std::size_t n_ch = rec.n_channels();
  const std::size_t n = rec.n_samples();
  ConditionedEmg out{Matrix(n_ch, n), std::vector<ChannelStats>(n_ch)};
  std::vector<std::size_t> dead;

  for (std::size_t c = 0; c < n_ch; ++c) {
    const auto raw = rec.channels.row(c);
    double peak = 0.0;
    for (double v : raw) peak = std::max(peak, std::abs(v));

    auto y = filter_channel(raw, rec.sample_rate, cfg);
    despike(y, cfg.despike_threshold);

    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(std::max<std::size_t>(1, n));
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(std::max<std::size_t>(1, n)));
    // A constant input leaves only rounding residue after the highpass.
    if (n == 0 || sd == 0.0 || sd <= 1e-9 * peak) {
      dead.push_back(c);
      continue;
    }
    out.channel_stats[c] = {mean, sd};
    auto row = out.channels.row(c);
    for (std::size_t i = 0; i < n; ++i) row[i] = (y[i] - mean) / sd;
  }

  if (!dead.empty()) {
    std::string list;
    for (auto c : dead) list += (list.empty() ? "" : ", ") + std::to_string(c);
    throw DomainError("dead channel(s) with zero variance after filtering: " + list);
  }
  return out;
}

EmgFeatures frame_features(const ConditionedEmg& conditioned, int sample_rate,
                           double target_frame_rate) {
  if (!(target_frame_rate > 0.0 && target_frame_rate <= sample_rate)) {
    throw DomainError("target frame rate must lie in (0, sample_rate]");
  }
  const auto& x = conditioned.channels;
  const std::size_t n_ch = x.rows();
  const std::size_t n = x.cols();
  const double frame_len = static_cast<double>(sample_rate) / target_frame_rate;
  const auto n_frames = static_cast<std::size_t>(std::floor(static_cast<double>(n) / frame_len));

  EmgFeatures out{Matrix(n_frames, n_ch * kEmgFeaturesPerChannel), target_frame_rate,
                  conditioned.channel_stats};
  std::vector<double> smooth(n);
  for (std::size_t c = 0; c < n_ch; ++c) {
    const auto row = x.row(c);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t lo = i >= 2 ? i - 2 : 0;
      const std::size_t hi = std::min(n - 1, i + 2);
      double s = 0.0;
      for (std::size_t k = lo; k <= hi; ++k) s += row[k];
      smooth[i] = s / static_cast<double>(hi - lo + 1);
    }
    for (std::size_t t = 0; t < n_frames; ++t) {
      const auto lo = static_cast<std::size_t>(std::floor(static_cast<double>(t) * frame_len));
      const auto hi = std::min(
          n, static_cast<std::size_t>(std::floor(static_cast<double>(t + 1) * frame_len)));
      double sq = 0.0, abs_sum = 0.0, low = 0.0, crossings = 0.0;
      for (std::size_t i = lo; i < hi; ++i) {
        sq += row[i] * row[i];
        abs_sum += std::abs(row[i]);
        low += smooth[i];
        if (i > lo && row[i - 1] * row[i] < 0.0) crossings += 1.0;
      }
      const double len = static_cast<double>(std::max<std::size_t>(1, hi - lo));
      auto f = out.frames.row(t).subspan(c * kEmgFeaturesPerChannel, kEmgFeaturesPerChannel);
      f[0] = std::sqrt(sq / len);
      f[1] = abs_sum / len;
      f[2] = crossings;
      f[3] = low / len;
    }
  }
  return out;
}

EmgFeatures preprocess(const EmgRecording& rec, const EmgPreprocessConfig& cfg) {
  return frame_features(condition(rec, cfg), rec.sample_rate, cfg.target_frame_rate);
}

EmgRecording apply_lead_shift(const EmgRecording& rec, double lead_ms) {
  rec.validate();
  const auto shift = std::llround(lead_ms * rec.sample_rate / 1000.0);
  const auto n = static_cast<long long>(rec.n_samples());
  if (shift != 0 && std::llabs(shift) >= n) {
    throw DomainError("lead shift of " + std::to_string(shift) + " samples is not shorter than the " +
                      std::to_string(n) + "-sample recording");
  }
  EmgRecording out = rec;
  out.channels = Matrix(rec.n_channels(), rec.n_samples(), 0.0);
  for (std::size_t c = 0; c < rec.n_channels(); ++c) {
    const auto src = rec.channels.row(c);
    auto dst = out.channels.row(c);
    for (long long i = 0; i < n; ++i) {
      const long long from = i - shift;
      if (from >= 0 && from < n) dst[static_cast<std::size_t>(i)] = src[static_cast<std::size_t>(from)];
    }
  }
  return out;
}

}  // namespace svtk
