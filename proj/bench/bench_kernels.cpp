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

// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "attrcmp/kernels.hpp"
#include "attrcmp/rng.hpp"
#include "attrcmp/segmenter.hpp"

namespace {

using namespace attrcmp;

ImageTensor NoiseImage(int side, std::uint64_t seed) {
  Rng rng(seed);
  ImageTensor img(Shape{side, side, 3});
  for (float& v : img.values()) v = static_cast<float>(rng.Uniform());
  return img;
}

kernels::Points RandomPoints(int n, int dims, std::uint64_t seed) {
  Rng rng(seed);
  kernels::Points pts(n, std::vector<double>(dims));
  for (auto& p : pts) {
    for (double& v : p) v = rng.Normal();
  }
  return pts;
}

void BM_BlurSerial(benchmark::State& state) {
  const auto img = NoiseImage(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::serial::GaussianBlur(img, 4.0));
  }
}

void BM_BlurParallel(benchmark::State& state) {
  const auto img = NoiseImage(static_cast<int>(state.range(0)), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::GaussianBlur(img, 4.0));
  }
}

void BM_AssignSerial(benchmark::State& state) {
  const auto pts = RandomPoints(static_cast<int>(state.range(0)), 27, 2);
  const auto cents = RandomPoints(8, 27, 3);
  std::vector<int> a;
  std::vector<double> d;
  for (auto _ : state) {
    kernels::serial::AssignNearest(pts, cents, &a, &d);
    benchmark::DoNotOptimize(a.data());
  }
}

void BM_AssignParallel(benchmark::State& state) {
  const auto pts = RandomPoints(static_cast<int>(state.range(0)), 27, 2);
  const auto cents = RandomPoints(8, 27, 3);
  std::vector<int> a;
  std::vector<double> d;
  for (auto _ : state) {
    kernels::AssignNearest(pts, cents, &a, &d);
    benchmark::DoNotOptimize(a.data());
  }
}

struct CoalitionInput {
  ImageTensor image;
  Tensor<double> blurred;
  std::vector<BBox> boxes;
};

CoalitionInput MakeCoalitionInput(int m) {
  CoalitionInput in{NoiseImage(64, 4), {}, {}};
  in.blurred = kernels::GaussianBlur(in.image, 8.0);
  const auto segs = GridSegments(64, 64, 4, 4);
  for (int i = 0; i < m; ++i) in.boxes.push_back(segs[i * 3 % 16].bbox);
  return in;
}

void BM_CoalitionSerial(benchmark::State& state) {
  const auto in = MakeCoalitionInput(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::serial::CoalitionImages(in.image, in.blurred, in.boxes));
  }
}

void BM_CoalitionParallel(benchmark::State& state) {
  const auto in = MakeCoalitionInput(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::CoalitionImages(in.image, in.blurred, in.boxes));
  }
}

}  // namespace

BENCHMARK(BM_BlurSerial)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_BlurParallel)->Arg(32)->Arg(128)->Arg(512);
BENCHMARK(BM_AssignSerial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_AssignParallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_CoalitionSerial)->Arg(5)->Arg(8);
BENCHMARK(BM_CoalitionParallel)->Arg(5)->Arg(8);

BENCHMARK_MAIN();
