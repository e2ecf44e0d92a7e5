/*
 * Copyright 2026 The attrcmp Authors.
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

#include "attrcmp/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "attrcmp/error.hpp"

namespace attrcmp::kernels {
namespace {

// Both blur passes work one output row at a time so the serial and OpenMP
// drivers run identical arithmetic.
void BlurRowHorizontal(const ImageTensor& in, std::span<const double> k,
                       int radius, int row, Tensor<double>* out) {
  const int w = in.width(), c = in.channels();
  for (int col = 0; col < w; ++col) {
    for (int ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        s += k[d + radius] * in.at(row, ReflectIndex(col + d, w), ch);
      }
      out->at(row, col, ch) = s;
    }
  }
}

void BlurRowVertical(const Tensor<double>& in, std::span<const double> k,
                     int radius, int row, Tensor<double>* out) {
  const int h = in.height(), w = in.width(), c = in.channels();
  for (int col = 0; col < w; ++col) {
    for (int ch = 0; ch < c; ++ch) {
      double s = 0.0;
      for (int d = -radius; d <= radius; ++d) {
        s += k[d + radius] * in.at(ReflectIndex(row + d, h), col, ch);
      }
      out->at(row, col, ch) = s;
    }
  }
}

void AssignOne(const Points& points, const Points& centroids, std::size_t i,
               std::vector<int>* assignment, std::vector<double>* sq) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < centroids.size(); ++k) {
    const double d = SquaredDistance(points[i], centroids[k]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  (*assignment)[i] = best;
  (*sq)[i] = best_d;
}

ImageTensor CompositeMask(const ImageTensor& image,
                          const Tensor<double>& blurred,
                          std::span<const BBox> selected, unsigned mask) {
  ImageTensor out = image;
  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (mask & (1u << i)) continue;
    const BBox& b = selected[i];
    for (int r = b.top; r < b.top + b.height; ++r) {
      for (int c = b.left; c < b.left + b.width; ++c) {
        for (int ch = 0; ch < image.channels(); ++ch) {
          out.at(r, c, ch) = static_cast<float>(
              std::clamp(blurred.at(r, c, ch), 0.0, 1.0));
        }
      }
    }
  }
  return out;
}

void CheckSigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InputError("blur sigma must be positive, got " +
                     std::to_string(sigma));
  }
}

}  // namespace

std::vector<double> GaussianKernel(double sigma) {
  CheckSigma(sigma);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    k[d + radius] = std::exp(-(double(d) * d) / (2.0 * sigma * sigma));
    total += k[d + radius];
  }
  for (double& v : k) v /= total;
  return k;
}

int ReflectIndex(int i, int n) {
  const int period = 2 * n;
  int j = i % period;
  if (j < 0) j += period;
  return j < n ? j : period - 1 - j;
}

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

Tensor<double> GaussianBlur(const ImageTensor& image, double sigma) {
  const auto k = GaussianKernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  Tensor<double> tmp(image.shape(), 0.0), out(image.shape(), 0.0);
  const int h = image.height();
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) BlurRowHorizontal(image, k, radius, r, &tmp);
#pragma omp parallel for schedule(static)
  for (int r = 0; r < h; ++r) BlurRowVertical(tmp, k, radius, r, &out);
  return out;
}

void AssignNearest(const Points& points, const Points& centroids,
                   std::vector<int>* assignment,
                   std::vector<double>* squared_distance) {
  assignment->assign(points.size(), 0);
  squared_distance->assign(points.size(), 0.0);
  const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    AssignOne(points, centroids, static_cast<std::size_t>(i), assignment,
              squared_distance);
  }
}

std::vector<ImageTensor> CoalitionImages(const ImageTensor& image,
                                         const Tensor<double>& blurred,
                                         std::span<const BBox> selected) {
  const int count = 1 << selected.size();
  std::vector<ImageTensor> out(count);
#pragma omp parallel for schedule(static)
  for (int mask = 0; mask < count; ++mask) {
    out[mask] = CompositeMask(image, blurred, selected,
                              static_cast<unsigned>(mask));
  }
  return out;
}

namespace serial {

Tensor<double> GaussianBlur(const ImageTensor& image, double sigma) {
  const auto k = GaussianKernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  Tensor<double> tmp(image.shape(), 0.0), out(image.shape(), 0.0);
  for (int r = 0; r < image.height(); ++r) {
    BlurRowHorizontal(image, k, radius, r, &tmp);
  }
  for (int r = 0; r < image.height(); ++r) {
    BlurRowVertical(tmp, k, radius, r, &out);
  }
  return out;
}

void AssignNearest(const Points& points, const Points& centroids,
                   std::vector<int>* assignment,
                   std::vector<double>* squared_distance) {
  assignment->assign(points.size(), 0);
  squared_distance->assign(points.size(), 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    AssignOne(points, centroids, i, assignment, squared_distance);
  }
}

std::vector<ImageTensor> CoalitionImages(const ImageTensor& image,
                                         const Tensor<double>& blurred,
                                         std::span<const BBox> selected) {
  const unsigned count = 1u << selected.size();
  std::vector<ImageTensor> out;
  out.reserve(count);
  for (unsigned mask = 0; mask < count; ++mask) {
    out.push_back(CompositeMask(image, blurred, selected, mask));
  }
  return out;
}

}  // namespace serial

int MaxThreads() { return omp_get_max_threads(); }

void SetThreads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace attrcmp::kernels
