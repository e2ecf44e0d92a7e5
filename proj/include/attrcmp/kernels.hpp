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

#ifndef ATTRCMP_KERNELS_HPP_
#define ATTRCMP_KERNELS_HPP_

// Data-parallel inner loops. Each kernel has an OpenMP version in
// attrcmp::kernels and a plain reference in attrcmp::kernels::serial; the two
// must agree bit for bit.

#include <span>
#include <vector>

#include "attrcmp/segmenter.hpp"
#include "attrcmp/tensor.hpp"

namespace attrcmp::kernels {

using Points = std::vector<std::vector<double>>;

// Normalized weights exp(-d^2 / 2 sigma^2) for d in [-r, r], r = ceil(3 sigma).
std::vector<double> GaussianKernel(double sigma);

// Half-sample symmetric reflection (edge pixel repeated), periodic for
// offsets beyond the image.
int ReflectIndex(int i, int n);

// Squared Euclidean distance.
double SquaredDistance(std::span<const double> a, std::span<const double> b);

Tensor<double> GaussianBlur(const ImageTensor& image, double sigma);

// Nearest centroid per point, ties to the lowest centroid id.
void AssignNearest(const Points& points, const Points& centroids,
                   std::vector<int>* assignment,
                   std::vector<double>* squared_distance);

// One image per coalition mask in [0, 2^m): bit i set keeps selected[i]
// intact, a cleared bit takes that cell from `blurred`.
std::vector<ImageTensor> CoalitionImages(const ImageTensor& image,
                                         const Tensor<double>& blurred,
                                         std::span<const BBox> selected);

namespace serial {

Tensor<double> GaussianBlur(const ImageTensor& image, double sigma);
void AssignNearest(const Points& points, const Points& centroids,
                   std::vector<int>* assignment,
                   std::vector<double>* squared_distance);
std::vector<ImageTensor> CoalitionImages(const ImageTensor& image,
                                         const Tensor<double>& blurred,
                                         std::span<const BBox> selected);

}  // namespace serial

// Number of OpenMP threads the parallel kernels will use.
int MaxThreads();
void SetThreads(int threads);

}  // namespace attrcmp::kernels

#endif  // ATTRCMP_KERNELS_HPP_
