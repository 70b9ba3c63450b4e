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

#include "g2v/raster.hpp"

#include <algorithm>
#include <cstdlib>

namespace g2v {

Canvas::Canvas(int width, int height, Rgb background)
    : width_(width), height_(height),
      pixels_(static_cast<size_t>(3) * width * height) {
  const size_t plane = static_cast<size_t>(width) * height;
  std::fill_n(pixels_.begin(), plane, background.r);
  std::fill_n(pixels_.begin() + plane, plane, background.g);
  std::fill_n(pixels_.begin() + 2 * plane, plane, background.b);
}

void Canvas::Set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
  const size_t plane = static_cast<size_t>(width_) * height_;
  const size_t at = static_cast<size_t>(y) * width_ + x;
  pixels_[at] = c.r;
  pixels_[plane + at] = c.g;
  pixels_[2 * plane + at] = c.b;
}

Rgb Canvas::At(int x, int y) const {
  const size_t plane = static_cast<size_t>(width_) * height_;
  const size_t at = static_cast<size_t>(y) * width_ + x;
  return {pixels_[at], pixels_[plane + at], pixels_[2 * plane + at]};
}

std::vector<Point> BresenhamLine(Point a, Point b) {
  std::vector<Point> out;
  const int dx = std::abs(b.x - a.x);
  const int dy = -std::abs(b.y - a.y);
  const int sx = a.x < b.x ? 1 : -1;
  const int sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  Point p = a;
  while (true) {
    out.push_back(p);
    if (p == b) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      p.x += sx;
    }
    if (e2 <= dx) {
      err += dx;
      p.y += sy;
    }
  }
  return out;
}

void Canvas::DrawThickLine(Point a, Point b, Rgb c) {
  const bool x_major = std::abs(b.x - a.x) >= std::abs(b.y - a.y);
  for (const Point p : BresenhamLine(a, b)) {
    for (int o = -1; o <= 1; ++o) {
      if (x_major) {
        Set(p.x, p.y + o, c);
      } else {
        Set(p.x + o, p.y, c);
      }
    }
  }
}

void Canvas::FillDisk(Point center, int radius, Rgb c) {
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) Set(center.x + dx, center.y + dy, c);
    }
  }
}

void Canvas::DrawRing(Point center, int radius, Rgb c) {
  const int inner = (radius - 1) * (radius - 1);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > inner && d2 <= radius * radius) Set(center.x + dx, center.y + dy, c);
    }
  }
}

}  // namespace g2v
