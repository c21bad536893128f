/* Copyright 2026 The EVWF Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Lip-region image features: orthonormal 2-D DCT-II and zigzag selection.

#ifndef EVWF_VISUAL_H_
#define EVWF_VISUAL_H_

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "evwf/types.h"

namespace evwf {

inline constexpr int kDctFeatureDim = 50;

// Grayscale image, intensities in [0, 1], row-major.
class VisualFrame {
 public:
  VisualFrame() = default;
  // Throws std::invalid_argument for empty dimensions, a size mismatch or
  // non-finite pixels.
  VisualFrame(int width, int height, std::vector<double> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  double at(int row, int col) const { return pixels_[row * width_ + col]; }
  std::span<const double> pixels() const { return pixels_; }
  Matrix AsMatrix() const;  // height x width

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> pixels_;
};

// height x width coefficients, orthonormal type-II in both directions.
Matrix Dct2(const VisualFrame& img);
Matrix Dct2(const Matrix& img);
Matrix InverseDct2(const Matrix& coeffs);

// JPEG-style zigzag over a rows x cols grid: (0,0), (0,1), (1,0), (2,0),
// (1,1), (0,2), ... First `count` (row, col) positions.
std::vector<std::pair<int, int>> ZigzagOrder(int rows, int cols, int count);
Vector ZigzagSelect(const Matrix& coeffs, int count = kDctFeatureDim);

// Dct2 followed by ZigzagSelect(kDctFeatureDim).
Vector VisualFeatures(const VisualFrame& img);

// Binary PGM (P5), maxval <= 255.
VisualFrame ReadPgm(const std::filesystem::path& path);
VisualFrame DecodePgm(std::span<const uint8_t> bytes);
std::vector<uint8_t> EncodePgm(const VisualFrame& img);
void WritePgm(const std::filesystem::path& path, const VisualFrame& img);

}  // namespace evwf

#endif  // EVWF_VISUAL_H_
