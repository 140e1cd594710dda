// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "svtk/error.hpp"

namespace svtk::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary readers assume a little-endian host");

std::vector<char> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  return out;
}

template <typename T>
T load_le(const char* p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

template <typename T>
void put_le(std::string& buf, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  buf.append(raw, sizeof(T));
}

double parse_number(std::string_view text, const std::string& what) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError("cannot parse " + what + " from \"" + std::string(text) + "\"");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = line.find(sep, start);
    parts.push_back(line.substr(start, end == std::string_view::npos ? end : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

bool blank(std::string_view s) { return s.find_first_not_of(" \t") == std::string_view::npos; }

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_bytes(path);
  return {bytes.begin(), bytes.end()};
}

// ---------------------------------------------------------------------------
// WAV

AudioBuffer read_wav(const fs::path& path, std::optional<int> channel) {
  const auto bytes = read_bytes(path);
  const auto where = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(where + ": not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, n_channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const char* chunk = bytes.data() + off;
    const auto size = load_le<std::uint32_t>(chunk + 4);
    const std::size_t body = off + 8;
    const std::size_t avail = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || avail < 16) throw FormatError(where + ": truncated fmt chunk");
      format = load_le<std::uint16_t>(bytes.data() + body);
      n_channels = load_le<std::uint16_t>(bytes.data() + body + 2);
      rate = load_le<std::uint32_t>(bytes.data() + body + 4);
      bits = load_le<std::uint16_t>(bytes.data() + body + 14);
      if (format == 0xFFFE) {
        if (size < 26 || avail < 26) throw FormatError(where + ": truncated extensible fmt chunk");
        format = load_le<std::uint16_t>(bytes.data() + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = std::min<std::size_t>(size, avail);
      if (size > avail) throw FormatError(where + ": data chunk is truncated");
    }
    off = body + size + (size & 1u);
  }
  if (n_channels == 0) throw FormatError(where + ": missing fmt chunk");
  if (data == nullptr) throw FormatError(where + ": missing data chunk");

  const bool pcm16 = format == 1 && bits == 16;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !f32) {
    throw FormatError(where + ": unsupported codec (format " + std::to_string(format) + ", " +
                      std::to_string(bits) + " bits); expected PCM-16 or float-32");
  }
  int ch = 0;
  if (n_channels > 1) {
    if (!channel) {
      throw FormatError(where + " has " + std::to_string(n_channels) +
                        " channels; select one explicitly");
    }
    ch = *channel;
  } else if (channel) {
    ch = *channel;
  }
  if (ch < 0 || ch >= n_channels) {
    throw FormatError(where + ": channel " + std::to_string(ch) + " out of range (file has " +
                      std::to_string(n_channels) + ")");
  }

  const std::size_t width = bits / 8;
  const std::size_t stride = width * n_channels;
  const std::size_t n = data_len / stride;
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const char* p = data + i * stride + static_cast<std::size_t>(ch) * width;
    samples[i] = pcm16 ? load_le<std::int16_t>(p) / 32768.0 : static_cast<double>(load_le<float>(p));
  }
  try {
    return AudioBuffer::clipped_from(std::move(samples), static_cast<int>(rate));
  } catch (const DomainError& e) {
    throw DataError(where + ": " + e.what());
  }
}

void write_wav(const fs::path& path, const AudioBuffer& audio, WavEncoding encoding) {
  const bool pcm16 = encoding == WavEncoding::pcm16;
  const std::uint16_t bits = pcm16 ? 16 : 32;
  const auto data_len = static_cast<std::uint32_t>(audio.size() * bits / 8);
  std::string buf;
  buf.reserve(44 + data_len);
  buf.append("RIFF");
  put_le<std::uint32_t>(buf, 36 + data_len);
  buf.append("WAVEfmt ");
  put_le<std::uint32_t>(buf, 16);
  put_le<std::uint16_t>(buf, pcm16 ? 1 : 3);
  put_le<std::uint16_t>(buf, 1);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(audio.sample_rate()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(audio.sample_rate()) * bits / 8);
  put_le<std::uint16_t>(buf, bits / 8);
  put_le<std::uint16_t>(buf, bits);
  buf.append("data");
  put_le<std::uint32_t>(buf, data_len);
  for (double s : audio.samples()) {
    if (pcm16) {
      const auto q = std::clamp<long long>(std::llround(s * 32768.0), -32768, 32767);
      put_le<std::int16_t>(buf, static_cast<std::int16_t>(q));
    } else {
      put_le<float>(buf, static_cast<float>(s));
    }
  }
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

// ---------------------------------------------------------------------------
// Contours

namespace {

constexpr std::string_view kContourHeader = "time_s,f0_hz,voiced";
constexpr double kDefaultContourHop = 0.01;

F0Frame checked_frame(double f0, double voiced, const std::string& where) {
  if (voiced != 0.0 && voiced != 1.0) throw FormatError(where + ": voiced must be 0 or 1");
  if (voiced == 0.0 && f0 != 0.0) throw FormatError(where + ": unvoiced frame with non-zero f0");
  if (voiced == 1.0 && !(f0 > 0.0 && std::isfinite(f0))) {
    throw FormatError(where + ": voiced frame needs a positive f0");
  }
  return {f0, voiced == 1.0};
}

}  // namespace

F0Contour read_contour_csv(const fs::path& path) {
  const auto lines = lines_of(read_text(path));
  const auto where = path.string();
  std::size_t i = 0;
  while (i < lines.size() && blank(lines[i])) ++i;
  if (i == lines.size()) throw FormatError(where + ": missing header");
  std::string header = lines[i];
  std::erase_if(header, [](char c) { return c == ' ' || c == '\t'; });
  if (header != kContourHeader) {
    throw FormatError(where + ": expected header \"" + std::string(kContourHeader) + "\"");
  }

  std::vector<double> times;
  std::vector<F0Frame> frames;
  for (++i; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const auto row = where + " line " + std::to_string(i + 1);
    const auto cells = split(lines[i], ',');
    if (cells.size() != 3) throw FormatError(row + ": expected 3 columns");
    const double t = parse_number(cells[0], "time_s");
    const double f0 = parse_number(cells[1], "f0_hz");
    const double v = parse_number(cells[2], "voiced");
    if (!std::isfinite(t)) throw FormatError(row + ": non-finite time");
    if (!times.empty() && !(t > times.back())) {
      throw FormatError(row + ": times must be strictly increasing");
    }
    times.push_back(t);
    frames.push_back(checked_frame(f0, v, row));
  }

  double hop = kDefaultContourHop;
  if (times.size() >= 2) {
    hop = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t k = 1; k < times.size(); ++k) {
      if (std::abs((times[k] - times[k - 1]) - hop) > 0.01 * hop) {
        throw FormatError(where + ": non-uniform frame times near row " + std::to_string(k + 1));
      }
    }
  }
  return F0Contour(std::move(frames), hop, 0, times.empty() ? 0.0 : times.front());
}

void write_contour_csv(const fs::path& path, const F0Contour& contour) {
  std::string buf(kContourHeader);
  buf.push_back('\n');
  for (std::size_t i = 0; i < contour.size(); ++i) {
    buf += format_double(contour.time_s(i));
    buf.push_back(',');
    buf += format_double(contour[i].f0_hz);
    buf += contour[i].voiced ? ",1\n" : ",0\n";
  }
  auto out = open_out(path);
  out << buf;
}

F0Contour read_contour_json(const fs::path& path) {
  const auto where = path.string();
  try {
    const auto j = json::parse(read_text(path));
    const double hop = j.at("hop_s").get<double>();
    const int rate = j.value("sample_rate_hz", 0);
    const double start = j.value("start_s", 0.0);
    const auto f0 = j.at("f0_hz").get<std::vector<double>>();
    const auto voiced = j.at("voiced").get<std::vector<double>>();
    if (f0.size() != voiced.size()) throw FormatError(where + ": f0_hz and voiced differ in length");
    std::vector<F0Frame> frames;
    frames.reserve(f0.size());
    for (std::size_t i = 0; i < f0.size(); ++i) {
      frames.push_back(checked_frame(f0[i], voiced[i], where + " frame " + std::to_string(i)));
    }
    return F0Contour(std::move(frames), hop, rate, start);
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  } catch (const DomainError& e) {
    throw FormatError(where + ": " + e.what());
  }
}

void write_contour_json(const fs::path& path, const F0Contour& contour) {
  json j;
  j["hop_s"] = contour.hop_s();
  j["sample_rate_hz"] = contour.sample_rate();
  j["start_s"] = contour.start_s();
  std::vector<double> f0;
  std::vector<int> voiced;
  for (const auto& f : contour.frames()) {
    f0.push_back(f.f0_hz);
    voiced.push_back(f.voiced ? 1 : 0);
  }
  j["f0_hz"] = f0;
  j["voiced"] = voiced;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

F0Contour read_contour(const fs::path& path) {
  return path.extension() == ".json" ? read_contour_json(path) : read_contour_csv(path);
}

void write_contour(const fs::path& path, const F0Contour& contour) {
  if (path.extension() == ".json") {
    write_contour_json(path, contour);
  } else {
    write_contour_csv(path, contour);
  }
}

// ---------------------------------------------------------------------------
// FTRX feature matrices

namespace {

constexpr std::size_t kFtrxHeaderBytes = 16;

Matrix parse_ftrx(const std::vector<char>& bytes, const std::string& where) {
  if (bytes.size() < kFtrxHeaderBytes || std::memcmp(bytes.data(), "FTRX", 4) != 0) {
    throw FormatError(where + ": missing FTRX magic");
  }
  const auto version = load_le<std::uint32_t>(bytes.data() + 4);
  if (version != kFtrxVersion) {
    throw FormatError(where + ": unsupported FTRX version " + std::to_string(version));
  }
  const auto rows = load_le<std::uint32_t>(bytes.data() + 8);
  const auto cols = load_le<std::uint32_t>(bytes.data() + 12);
  const auto expected = static_cast<std::uint64_t>(rows) * cols * 4;
  const auto actual = bytes.size() - kFtrxHeaderBytes;
  if (expected != actual) {
    throw FormatError(where + ": header declares " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " (" + std::to_string(expected) +
                      " payload bytes) but file has " + std::to_string(actual));
  }
  std::vector<double> data(static_cast<std::size_t>(rows) * cols);
  for (std::size_t k = 0; k < data.size(); ++k) {
    data[k] = load_le<float>(bytes.data() + kFtrxHeaderBytes + 4 * k);
    if (!std::isfinite(data[k])) throw DataError(where + ": non-finite value at index " + std::to_string(k));
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

Matrix read_features(const fs::path& path) { return parse_ftrx(read_bytes(path), path.string()); }

void write_features(const fs::path& path, const Matrix& m) {
  std::string buf("FTRX");
  put_le<std::uint32_t>(buf, kFtrxVersion);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.rows()));
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(m.cols()));
  for (double v : m.data()) put_le<float>(buf, static_cast<float>(v));
  auto out = open_out(path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

SpeakerEmbedding read_embedding(const fs::path& path) {
  const auto bytes = read_bytes(path);
  const auto where = path.string();
  SpeakerEmbedding emb;
  emb.speaker_id = path.stem().string();
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), "FTRX", 4) == 0) {
    const auto m = parse_ftrx(bytes, where);
    if (m.rows() != 1) throw FormatError(where + ": embedding FTRX must have exactly one row");
    emb.vector.assign(m.data().begin(), m.data().end());
    return emb;
  }
  std::string row;
  for (const auto& line : lines_of({bytes.begin(), bytes.end()})) {
    if (blank(line)) continue;
    if (!row.empty()) throw FormatError(where + ": embedding CSV must be a single row");
    row = line;
  }
  if (row.empty()) throw FormatError(where + ": empty embedding file");
  for (auto cell : split(row, ',')) emb.vector.push_back(parse_number(cell, "embedding value"));
  for (double v : emb.vector) {
    if (!std::isfinite(v)) throw DataError(where + ": non-finite embedding value");
  }
  return emb;
}

// ---------------------------------------------------------------------------
// EMG sessions

EmgRecording load_session(const fs::path& manifest_path) {
  const auto where = manifest_path.string();
  json j;
  try {
    j = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  for (const char* key :
       {"session_id", "speaker_id", "mode", "sample_rate_hz", "channels", "samples", "payload"}) {
    if (!j.contains(key)) throw FormatError(where + ": manifest is missing \"" + key + "\"");
  }

  EmgRecording rec;
  std::int64_t n_ch = 0, n = 0;
  std::string payload;
  try {
    rec.session_id = j.at("session_id").get<std::string>();
    rec.speaker_id = j.at("speaker_id").get<std::string>();
    rec.mode = parse_emg_mode(j.at("mode").get<std::string>());
    rec.sample_rate = j.at("sample_rate_hz").get<int>();
    n_ch = j.at("channels").get<std::int64_t>();
    n = j.at("samples").get<std::int64_t>();
    payload = j.at("payload").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  if (n_ch < 1 || n < 0 || rec.sample_rate <= 0) {
    throw FormatError(where + ": invalid channels/samples/sample_rate_hz");
  }

  const auto payload_path = manifest_path.parent_path() / payload;
  const auto bytes = read_bytes(payload_path);
  const auto expected = static_cast<std::uint64_t>(n_ch) * static_cast<std::uint64_t>(n) * 4;
  if (bytes.size() != expected) {
    throw FormatError(payload_path.string() + ": expected " + std::to_string(expected) +
                      " bytes for " + std::to_string(n_ch) + "x" + std::to_string(n) +
                      " float32 samples, found " + std::to_string(bytes.size()));
  }
  std::vector<double> data(static_cast<std::size_t>(n_ch * n));
  for (std::size_t k = 0; k < data.size(); ++k) data[k] = load_le<float>(bytes.data() + 4 * k);
  rec.channels = Matrix(static_cast<std::size_t>(n_ch), static_cast<std::size_t>(n), std::move(data));
  rec.validate();
  return rec;
}

void save_session(const fs::path& manifest_path, const EmgRecording& rec,
                  const std::string& payload_name) {
  rec.validate();
  const std::string payload =
      payload_name.empty() ? manifest_path.stem().string() + ".f32" : payload_name;
  json j;
  j["session_id"] = rec.session_id;
  j["speaker_id"] = rec.speaker_id;
  j["mode"] = to_string(rec.mode);
  j["sample_rate_hz"] = rec.sample_rate;
  j["channels"] = rec.n_channels();
  j["samples"] = rec.n_samples();
  j["payload"] = payload;

  std::string buf;
  buf.reserve(rec.channels.data().size() * 4);
  for (double v : rec.channels.data()) put_le<float>(buf, static_cast<float>(v));
  {
    auto out = open_out(manifest_path.parent_path() / payload);
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  auto out = open_out(manifest_path);
  out << j.dump(2) << '\n';
}

}  // namespace svtk::io
