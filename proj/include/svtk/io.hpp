// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "svtk/align.hpp"
#include "svtk/contour.hpp"
#include "svtk/emg.hpp"
#include "svtk/matrix.hpp"
#include "svtk/metrics.hpp"
#include "svtk/signal.hpp"

namespace svtk::io {

enum class WavEncoding { pcm16, float32 };

/// Reads PCM-16 or IEEE float-32 RIFF/WAVE. Multi-channel files require
/// `channel`; float samples outside [-1, 1] are clipped (see
/// AudioBuffer::clipped()).
AudioBuffer read_wav(const std::filesystem::path& path, std::optional<int> channel = std::nullopt);
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio,
               WavEncoding encoding = WavEncoding::float32);

/// CSV with header `time_s,f0_hz,voiced`. The hop is inferred from the time
/// column, which must be uniform to within 1%.
F0Contour read_contour_csv(const std::filesystem::path& path);
void write_contour_csv(const std::filesystem::path& path, const F0Contour& contour);

/// {"hop_s", "sample_rate_hz", "start_s", "f0_hz": [...], "voiced": [...]}
F0Contour read_contour_json(const std::filesystem::path& path);
void write_contour_json(const std::filesystem::path& path, const F0Contour& contour);

/// Dispatches on extension: .json -> JSON, anything else -> CSV.
F0Contour read_contour(const std::filesystem::path& path);
void write_contour(const std::filesystem::path& path, const F0Contour& contour);

/// FTRX: "FTRX", u32 version (1), u32 rows, u32 cols, rows*cols f32, all
/// little-endian, row-major.
inline constexpr std::uint32_t kFtrxVersion = 1;
Matrix read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const Matrix& m);

/// Single CSV row of numbers, or an FTRX file with one row.
SpeakerEmbedding read_embedding(const std::filesystem::path& path);

/// EMG session: manifest JSON plus a channel-major little-endian f32 payload.
EmgRecording load_session(const std::filesystem::path& manifest_path);
/// Writes `manifest_path` and its payload (`<stem>.f32` next to it unless
/// `payload_name` is given).
void save_session(const std::filesystem::path& manifest_path, const EmgRecording& rec,
                  const std::string& payload_name = {});

std::string read_text(const std::filesystem::path& path);

/// Shortest decimal that round-trips the double.
std::string format_double(double v);

}  // namespace svtk::io
