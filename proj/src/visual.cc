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

#include "evwf/visual.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "io_util.h"

namespace evwf {

VisualFrame::VisualFrame(int width, int height, std::vector<double> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width_ < 1 || height_ < 1) {
    throw std::invalid_argument("VisualFrame: empty image");
  }
  if (pixels_.size() != static_cast<size_t>(width_) * height_) {
    throw std::invalid_argument("VisualFrame: pixel count != width * height");
  }
  for (double p : pixels_) {
    if (!std::isfinite(p)) throw std::invalid_argument("VisualFrame: non-finite pixel");
  }
}

Matrix VisualFrame::AsMatrix() const {
  return Eigen::Map<const Matrix>(pixels_.data(), height_, width_);
}

namespace {

// Orthonormal DCT-II basis, row k = s_k cos(pi (2i + 1) k / (2n)).
Matrix DctBasis(Eigen::Index n) {
  Matrix d(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double s = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      d(k, i) = s * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
  }
  return d;
}

}  // namespace

Matrix Dct2(const Matrix& img) {
  if (img.size() == 0) throw std::invalid_argument("Dct2: empty image");
  return DctBasis(img.rows()) * img * DctBasis(img.cols()).transpose();
}

Matrix Dct2(const VisualFrame& img) {
  if (img.width() == 0) throw std::invalid_argument("Dct2: empty image");
  return Dct2(img.AsMatrix());
}

Matrix InverseDct2(const Matrix& coeffs) {
  if (coeffs.size() == 0) throw std::invalid_argument("InverseDct2: empty input");
  return DctBasis(coeffs.rows()).transpose() * coeffs * DctBasis(coeffs.cols());
}

std::vector<std::pair<int, int>> ZigzagOrder(int rows, int cols, int count) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("ZigzagOrder: empty grid");
  if (count < 0 || count > rows * cols) {
    throw std::invalid_argument("ZigzagOrder: count " + std::to_string(count) +
                                " exceeds " + std::to_string(rows * cols) +
                                " coefficients");
  }
  std::vector<std::pair<int, int>> order;
  order.reserve(count);
  for (int s = 0; s <= rows + cols - 2 && static_cast<int>(order.size()) < count; ++s) {
    const int r_lo = std::max(0, s - cols + 1);
    const int r_hi = std::min(s, rows - 1);
    if (s % 2 == 1) {
      for (int r = r_lo; r <= r_hi && static_cast<int>(order.size()) < count; ++r) {
        order.emplace_back(r, s - r);
      }
    } else {
      for (int r = r_hi; r >= r_lo && static_cast<int>(order.size()) < count; --r) {
        order.emplace_back(r, s - r);
      }
    }
  }
  return order;
}

Vector ZigzagSelect(const Matrix& coeffs, int count) {
  const auto order = ZigzagOrder(static_cast<int>(coeffs.rows()),
                                 static_cast<int>(coeffs.cols()), count);
  Vector out(count);
  for (int i = 0; i < count; ++i) out[i] = coeffs(order[i].first, order[i].second);
  return out;
}

Vector VisualFeatures(const VisualFrame& img) {
  return ZigzagSelect(Dct2(img), kDctFeatureDim);
}

VisualFrame DecodePgm(std::span<const uint8_t> bytes) {
  size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) {
      throw DataError("PGM: malformed header");
    }
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 20) throw DataError("PGM: header value too large");
    }
    return static_cast<int>(v);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw DataError("PGM: missing P5 magic");
  }
  pos = 2;
  const int width = read_int();
  const int height = read_int();
  const int maxval = read_int();
  if (width < 1 || height < 1) throw DataError("PGM: empty image");
  if (maxval < 1 || maxval > 255) throw DataError("PGM: only maxval <= 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) {
    throw DataError("PGM: malformed header");
  }
  ++pos;
  const size_t n = static_cast<size_t>(width) * height;
  if (bytes.size() - pos < n) throw DataError("PGM: truncated pixel data");
  std::vector<double> pixels(n);
  for (size_t i = 0; i < n; ++i) pixels[i] = bytes[pos + i] / static_cast<double>(maxval);
  return VisualFrame(width, height, std::move(pixels));
}

std::vector<uint8_t> EncodePgm(const VisualFrame& img) {
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  for (double p : img.pixels()) {
    out.push_back(static_cast<uint8_t>(std::lround(std::clamp(p, 0.0, 1.0) * 255.0)));
  }
  return out;
}

VisualFrame ReadPgm(const std::filesystem::path& path) {
  const auto bytes = internal::ReadFileBytes(path);
  try {
    return DecodePgm(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void WritePgm(const std::filesystem::path& path, const VisualFrame& img) {
  internal::WriteFileBytes(path, EncodePgm(img));
}

}  // namespace evwf
