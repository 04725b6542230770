// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#include "tad/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>

namespace tad::io {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError(path + ": cannot open for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (!f.good() && !f.eof()) throw FormatError(path + ": read failed");
  return ss.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw FormatError(path + ": cannot open for writing");
  f.write(bytes.data(), std::streamsize(bytes.size()));
  if (!f.good()) throw FormatError(path + ": write failed");
}

// ---- PGM --------------------------------------------------------------------

namespace {

[[noreturn]] void pgm_fail(const std::string& origin, size_t off, const std::string& why) {
  throw FormatError(origin + ": " + why + " (byte " + std::to_string(off) + ")");
}

// Skips PGM whitespace and '#' comments; returns false at end of input.
bool skip_pgm_space(const std::string& s, size_t& off) {
  while (off < s.size()) {
    char c = s[off];
    if (c == '#') {
      while (off < s.size() && s[off] != '\n') ++off;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f') {
      ++off;
    } else {
      return true;
    }
  }
  return false;
}

long parse_pgm_int(const std::string& s, size_t& off, const std::string& origin,
                   const char* what) {
  if (!skip_pgm_space(s, off)) pgm_fail(origin, off, std::string("missing ") + what);
  size_t start = off;
  long val = 0;
  while (off < s.size() && s[off] >= '0' && s[off] <= '9') {
    val = val * 10 + (s[off] - '0');
    if (val > 1000000000L) pgm_fail(origin, start, std::string(what) + " out of range");
    ++off;
  }
  if (off == start) pgm_fail(origin, off, std::string("expected digits for ") + what);
  return val;
}

}  // namespace

GrayImage decode_pgm(const std::string& s, const std::string& origin) {
  size_t off = 0;
  if (s.size() < 2 || s[0] != 'P' || s[1] != '5')
    pgm_fail(origin, 0, "bad magic, expected P5");
  off = 2;
  long w = parse_pgm_int(s, off, origin, "width");
  long h = parse_pgm_int(s, off, origin, "height");
  long maxval = parse_pgm_int(s, off, origin, "maxval");
  if (w < 1 || h < 1) pgm_fail(origin, off, "non-positive dimensions");
  if (maxval < 1 || maxval > 255) pgm_fail(origin, off, "maxval must be in [1,255] (8-bit)");
  if (off >= s.size()) pgm_fail(origin, off, "truncated after header");
  char sep = s[off];
  if (sep != ' ' && sep != '\t' && sep != '\r' && sep != '\n')
    pgm_fail(origin, off, "expected single whitespace before raster");
  ++off;
  size_t need = size_t(w) * size_t(h);
  if (s.size() - off < need)
    pgm_fail(origin, s.size(), "truncated raster, expected " + std::to_string(need) +
                                   " bytes, got " + std::to_string(s.size() - off));

  GrayImage img{int(w), int(h)};
  const double inv = 1.0 / double(maxval);
  for (size_t i = 0; i < need; ++i)
    img.data[i] = double(uint8_t(s[off + i])) * inv;
  return img;
}

GrayImage read_pgm(const std::string& path) {
  return decode_pgm(read_file(path), path);
}

std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.npixels());
  for (double v : img.data) {
    double c = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    out.push_back(char(uint8_t(std::lround(c * 255.0))));
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  write_file(path, encode_pgm(img));
}

// ---- SMAP -------------------------------------------------------------------

namespace {

constexpr char kSmapMagic[4] = {'S', 'M', 'A', 'P'};
constexpr uint8_t kSmapVersion = 0x01;

void put_u32le(std::string& s, uint32_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char((v >> 8) & 0xff));
  s.push_back(char((v >> 16) & 0xff));
  s.push_back(char((v >> 24) & 0xff));
}

uint32_t get_u32le(const std::string& s, size_t off) {
  return uint32_t(uint8_t(s[off])) | uint32_t(uint8_t(s[off + 1])) << 8 |
         uint32_t(uint8_t(s[off + 2])) << 16 | uint32_t(uint8_t(s[off + 3])) << 24;
}

void put_f32le(std::string& s, float f) {
  uint32_t bits;
  std::memcpy(&bits, &f, 4);
  put_u32le(s, bits);
}

float get_f32le(const std::string& s, size_t off) {
  uint32_t bits = get_u32le(s, off);
  float f;
  std::memcpy(&f, &bits, 4);
  return f;
}

std::string encode_smap(int width, int height, const std::vector<double>& data) {
  std::string out;
  out.reserve(9 + data.size() * 4);
  out.append(kSmapMagic, 4);
  out.push_back(char(kSmapVersion));
  put_u32le(out, uint32_t(width));
  put_u32le(out, uint32_t(height));
  for (double v : data) put_f32le(out, float(v));
  return out;
}

// width, height, payload
std::tuple<int, int, std::vector<double>> decode_smap(const std::string& s,
                                                      const std::string& origin) {
  if (s.size() < 13) throw FormatError(origin + ": truncated SMAP header");
  if (std::memcmp(s.data(), kSmapMagic, 4) != 0)
    throw FormatError(origin + ": bad SMAP magic");
  if (uint8_t(s[4]) != kSmapVersion)
    throw FormatError(origin + ": unsupported SMAP version " + std::to_string(uint8_t(s[4])));
  uint32_t w = get_u32le(s, 5);
  uint32_t h = get_u32le(s, 9);
  if (w == 0 || h == 0 || uint64_t(w) * h > (uint64_t(1) << 31))
    throw FormatError(origin + ": bad SMAP dimensions");
  uint64_t need = uint64_t(w) * h;
  if (s.size() != 13 + need * 4)
    throw FormatError(origin + ": SMAP payload size mismatch, header says " +
                      std::to_string(need) + " floats, file holds " +
                      std::to_string((s.size() - 13) / 4));
  std::vector<double> data(need);
  for (uint64_t i = 0; i < need; ++i)
    data[i] = double(get_f32le(s, 13 + i * 4));
  return {int(w), int(h), std::move(data)};
}

}  // namespace

ScoreMap read_smap(const std::string& path) {
  auto [w, h, data] = decode_smap(read_file(path), path);
  try {
    return ScoreMap::from_data(w, h, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_smap(const ScoreMap& map, const std::string& path) {
  write_file(path, encode_smap(map.width, map.height, map.data));
}

StrokeWidthMap read_swt_map(const std::string& path) {
  auto [w, h, data] = decode_smap(read_file(path), path);
  try {
    return StrokeWidthMap::from_data(w, h, std::move(data));
  } catch (const std::invalid_argument& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_swt_map(const StrokeWidthMap& map, const std::string& path) {
  write_file(path, encode_smap(map.width, map.height, map.data));
}

PixelPartition read_partition(const std::string& path) {
  auto [w, h, data] = decode_smap(read_file(path), path);
  PixelPartition part(w, h);
  for (size_t i = 0; i < data.size(); ++i) {
    if (data[i] == 0.0) part.state[i] = PixelState::Ignored;
    else if (data[i] == 1.0) part.state[i] = PixelState::NegativeKept;
    else if (data[i] == 2.0) part.state[i] = PixelState::Positive;
    else throw FormatError(path + ": partition value not in {0,1,2}");
  }
  return part;
}

void write_partition(const PixelPartition& part, const std::string& path) {
  std::vector<double> data(part.state.size());
  for (size_t i = 0; i < data.size(); ++i)
    data[i] = double(uint8_t(part.state[i]));
  write_file(path, encode_smap(part.width, part.height, data));
}

// ---- ICDAR box text ----------------------------------------------------------

namespace {

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) return false;
  while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
  return *end == '\0';
}

std::string format_coord(double v) {
  char buf[40];
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

}  // namespace

std::vector<QuadBox> parse_icdar_boxes(const std::string& text) {
  std::vector<QuadBox> boxes;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // strip a UTF-8 BOM on the first line (ICDAR ground truth often has one)
    if (lineno == 1 && line.size() >= 3 && uint8_t(line[0]) == 0xEF &&
        uint8_t(line[1]) == 0xBB && uint8_t(line[2]) == 0xBF)
      line.erase(0, 3);
    if (line.empty()) continue;

    QuadBox box;
    size_t pos = 0;
    for (int i = 0; i < 8; ++i) {
      size_t comma = line.find(',', pos);
      bool last_field = (i == 7) && comma == std::string::npos;
      if (comma == std::string::npos && !last_field)
        throw FormatError("line " + std::to_string(lineno) + ": expected 8 coordinates");
      std::string field = line.substr(pos, last_field ? std::string::npos : comma - pos);
      double value;
      if (!parse_double(field, value))
        throw FormatError("line " + std::to_string(lineno) + ": non-numeric coordinate '" +
                          field + "'");
      if (i % 2 == 0) box.v[i / 2].x = value;
      else box.v[i / 2].y = value;
      pos = last_field ? line.size() : comma + 1;
    }
    if (pos < line.size()) {
      std::string transcription = line.substr(pos);
      box.ignore = (transcription == "###");
    }
    boxes.push_back(box);
  }
  return boxes;
}

std::string emit_icdar_boxes(const std::vector<QuadBox>& boxes) {
  std::string out;
  for (const QuadBox& b : boxes) {
    for (int i = 0; i < 4; ++i) {
      out += format_coord(b.v[i].x);
      out += ',';
      out += format_coord(b.v[i].y);
      if (i != 3) out += ',';
    }
    if (b.ignore) out += ",###";
    out += '\n';
  }
  return out;
}

std::vector<QuadBox> read_icdar_boxes(const std::string& path) {
  try {
    return parse_icdar_boxes(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void write_icdar_boxes(const std::vector<QuadBox>& boxes, const std::string& path) {
  write_file(path, emit_icdar_boxes(boxes));
}

}  // namespace tad::io
