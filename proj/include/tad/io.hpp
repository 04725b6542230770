// Copyright 2026 The textadapt Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "tad/types.hpp"

namespace tad::io {

// ---- binary PGM (P5), 8-bit ------------------------------------------------
// Luminance is byte/255. write(read(f)) is byte-identical for valid files.
GrayImage read_pgm(const std::string& path);
void write_pgm(const GrayImage& img, const std::string& path);

GrayImage decode_pgm(const std::string& bytes, const std::string& origin);
std::string encode_pgm(const GrayImage& img);

// ---- SMAP float raster -----------------------------------------------------
// magic "SMAP", version 0x01, u32 LE width, u32 LE height, then
// width*height f32 LE row-major. Round trips are bit-exact on the payload.
ScoreMap read_smap(const std::string& path);
void write_smap(const ScoreMap& map, const std::string& path);

// Same container reused for stroke-width maps (kNoStroke stored as -1)
// and pseudo-label partitions (0 = ignored, 1 = negative kept, 2 = positive).
StrokeWidthMap read_swt_map(const std::string& path);
void write_swt_map(const StrokeWidthMap& map, const std::string& path);
PixelPartition read_partition(const std::string& path);
void write_partition(const PixelPartition& part, const std::string& path);

// ---- ICDAR box text files --------------------------------------------------
// One box per line: "x1,y1,x2,y2,x3,y3,x4,y4[,transcription]".
// Transcription "###" sets the ignore flag. Everything after the eighth
// comma is transcription (it may itself contain commas).
std::vector<QuadBox> parse_icdar_boxes(const std::string& text);
std::string emit_icdar_boxes(const std::vector<QuadBox>& boxes);
std::vector<QuadBox> read_icdar_boxes(const std::string& path);
void write_icdar_boxes(const std::vector<QuadBox>& boxes, const std::string& path);

// ---- generic helpers --------------------------------------------------------
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

}  // namespace tad::io
