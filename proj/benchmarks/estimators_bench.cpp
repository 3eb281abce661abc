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

#include <optional>

#include "vcae/estimators.hpp"
#include "vcae/models.hpp"

namespace {

using vcae::RngStream;
using vcae::models::Variant;

vcae::models::Batch binary_batch(std::size_t rows, std::size_t dim) {
  RngStream r(7);
  vcae::Tensor x(vcae::Tensor::Shape{rows, dim});
  for (double& v : x.data()) v = r.uniform01() < 0.3 ? 1.0 : 0.0;
  return vcae::models::task_adapt(vcae::models::Task::GenerativeModeling, x);
}

vcae::models::ModelSpec mnist_spec(Variant v, vcae::nets::Hidden h) {
  vcae::models::ModelSpec s;
  s.variant = v;
  s.hidden = h;
  return s;
}

// One training-step gradient estimate on a batch of 100 MNIST-sized rows.
void BM_GradientStep(benchmark::State& state) {
  const auto variant = static_cast<Variant>(state.range(0));
  const auto hidden = static_cast<vcae::nets::Hidden>(state.range(1));
  vcae::models::Model m(mnist_spec(variant, hidden), 1);
  std::optional<vcae::est::NvilState> nvil;
  if (variant == Variant::Nvil || variant == Variant::VcaeDiscrete) nvil.emplace(784, 2);
  const auto batch = binary_batch(100, 784);
  RngStream r(3);
  for (auto _ : state) {
    m.params().zero_grad();
    benchmark::DoNotOptimize(vcae::est::estimate_gradients(m, batch, r, nvil ? &*nvil : nullptr));
  }
  state.SetLabel(vcae::models::to_string(variant) + "/" + vcae::models::to_string(hidden));
}
BENCHMARK(BM_GradientStep)
    ->ArgsProduct({{static_cast<long>(Variant::VAE), static_cast<long>(Variant::ConcreteS),
                    static_cast<long>(Variant::VcaeGaussian), static_cast<long>(Variant::VcaeDiscrete),
                    static_cast<long>(Variant::Nvil)},
                   {static_cast<long>(vcae::nets::Hidden::Linear), static_cast<long>(vcae::nets::Hidden::Nonlinear)}})
    ->Unit(benchmark::kMillisecond);

void BM_VarianceProbe(benchmark::State& state) {
  const vcae::models::Model m(mnist_spec(Variant::VcaeGaussian, vcae::nets::Hidden::Linear), 1);
  const auto batch = binary_batch(100, 784);
  const auto replicas = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(vcae::est::variance_probe(m, batch, replicas, RngStream(5)));
}
BENCHMARK(BM_VarianceProbe)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace
