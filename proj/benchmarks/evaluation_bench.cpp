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

#include "vcae/models.hpp"

namespace {

using vcae::RngStream;
using vcae::models::Variant;

void BM_IwaeEstimate(benchmark::State& state) {
  vcae::models::ModelSpec s;
  s.variant = static_cast<Variant>(state.range(0));
  const vcae::models::Model m(s, 1);
  const auto k = static_cast<std::size_t>(state.range(1));
  RngStream data(2);
  vcae::Tensor x(vcae::Tensor::Shape{10, 784});
  for (double& v : x.data()) v = data.uniform01() < 0.3 ? 1.0 : 0.0;
  const auto batch = vcae::models::task_adapt(vcae::models::Task::GenerativeModeling, x);
  RngStream r(3);
  for (auto _ : state) benchmark::DoNotOptimize(vcae::models::iwae_estimate(m, batch, k, r));
  state.SetItemsProcessed(state.iterations() * 10);
  state.SetLabel(vcae::models::to_string(s.variant) + " K=" + std::to_string(k));
}
BENCHMARK(BM_IwaeEstimate)
    ->Args({static_cast<long>(Variant::VAE), 100})
    ->Args({static_cast<long>(Variant::VcaeGaussian), 100})
    ->Args({static_cast<long>(Variant::VcaeGaussian), 1000})
    ->Unit(benchmark::kMillisecond);

void BM_ConcreteZTestEval(benchmark::State& state) {
  vcae::models::ModelSpec s;
  s.variant = Variant::ConcreteZ;
  const vcae::models::Model m(s, 1);
  RngStream data(2);
  vcae::Tensor x(vcae::Tensor::Shape{10, 784});
  for (double& v : x.data()) v = data.uniform01() < 0.3 ? 1.0 : 0.0;
  const auto batch = vcae::models::task_adapt(vcae::models::Task::GenerativeModeling, x);
  RngStream r(3);
  for (auto _ : state) benchmark::DoNotOptimize(vcae::models::concrete_z_test_eval(m, batch, 100, r));
}
BENCHMARK(BM_ConcreteZTestEval)->Unit(benchmark::kMillisecond);

}  // namespace
