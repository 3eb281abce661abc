// Copyright 2026 The VCAE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "vcae/distributions.hpp"
#include "vcae/numerics.hpp"
#include "vcae/rng.hpp"

namespace {

using vcae::RngStream;
using vcae::SampleKind;
using vcae::Tensor;

void BM_AffineForward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  RngStream r(1);
  const Tensor w = vcae::sample(r, SampleKind::StdNormal, {in, out});
  const Tensor b = vcae::sample(r, SampleKind::StdNormal, {out});
  const Tensor x = vcae::sample(r, SampleKind::StdNormal, {rows, in});
  for (auto _ : state) benchmark::DoNotOptimize(vcae::affine(w, b, x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows * in * out));
}
BENCHMARK(BM_AffineForward)->Args({100, 784, 200})->Args({100, 200, 200})->Args({10000, 200, 784});

void BM_AffineBackward(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto in = static_cast<std::size_t>(state.range(1));
  const auto out = static_cast<std::size_t>(state.range(2));
  RngStream r(2);
  const Tensor w = vcae::sample(r, SampleKind::StdNormal, {in, out});
  const Tensor x = vcae::sample(r, SampleKind::StdNormal, {rows, in});
  const Tensor g = vcae::sample(r, SampleKind::StdNormal, {rows, out});
  Tensor gw({in, out}), gb({out}), gx;
  for (auto _ : state) {
    vcae::affine_backward(w, x, g, gw, gb, &gx);
    benchmark::DoNotOptimize(gx.data().data());
  }
}
BENCHMARK(BM_AffineBackward)->Args({100, 784, 200})->Args({100, 200, 200});

void BM_ConcreteSampleAndDensity(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream r(3);
  const vcae::dist::BinaryConcreteParams p{vcae::sample(r, SampleKind::StdNormal, {100, n}), 0.5};
  for (auto _ : state) {
    const Tensor y = vcae::dist::concrete_sample_logit(p, vcae::sample(r, SampleKind::StdLogistic, {100, n}));
    benchmark::DoNotOptimize(vcae::dist::concrete_log_density_logit(y, p));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(100 * n));
}
BENCHMARK(BM_ConcreteSampleAndDensity)->Arg(200);

void BM_RngUniform(benchmark::State& state) {
  RngStream r(4);
  for (auto _ : state) benchmark::DoNotOptimize(r.uniform01());
}
BENCHMARK(BM_RngUniform);

}  // namespace

BENCHMARK_MAIN();
