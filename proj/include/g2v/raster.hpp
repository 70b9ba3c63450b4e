/*
 * Copyright 2026 The g2v Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef G2V_RASTER_HPP_
#define G2V_RASTER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace g2v {

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;

  bool operator==(const Rgb&) const = default;
};

struct Point {
  int x = 0;
  int y = 0;

  bool operator==(const Point&) const = default;
};

// Planar RGB canvas laid out [channel][row][column]. Integer-only drawing:
// no anti-aliasing, so output is bit-identical on every platform.
class Canvas {
 public:
  Canvas(int width, int height, Rgb background);

  int width() const { return width_; }
  int height() const { return height_; }

  void Set(int x, int y, Rgb c);
  Rgb At(int x, int y) const;

  // Bresenham centerline stamped with a 3-pixel span across the minor axis.
  void DrawThickLine(Point a, Point b, Rgb c);
  void FillDisk(Point center, int radius, Rgb c);
  // One-pixel ring: (radius-1)^2 < d^2 <= radius^2.
  void DrawRing(Point center, int radius, Rgb c);

  std::span<const uint8_t> pixels() const { return pixels_; }
  std::vector<uint8_t> TakePixels() && { return std::move(pixels_); }

 private:
  int width_;
  int height_;
  std::vector<uint8_t> pixels_;
};

// Centerline points of the Bresenham segment from a to b, inclusive.
std::vector<Point> BresenhamLine(Point a, Point b);

}  // namespace g2v

#endif  // G2V_RASTER_HPP_
