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

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "vcae/models.hpp"
#include "vcae/nets.hpp"
#include "vcae/rng.hpp"
#include "vcae/tensor.hpp"

// Gradient estimators. Every step function leaves in the parameter store the
// gradient of the training loss, -mean(bound) over the batch, added to
// whatever the gradient buffers already held.

namespace vcae::est {

/// Raised when a pathwise route meets a node that cannot be reparameterized.
class GraphError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class ParamGroup { Theta1 = 0, Theta2 = 1, Psi = 2, Phi = 3 };
inline constexpr std::size_t kGroupCount = 4;

/// q_s -> theta1, q_z -> theta2, p_s and prior -> psi, p_x -> phi.
ParamGroup group_of(const std::string& param_name);
std::string to_string(ParamGroup g);

// ---- Pathwise -------------------------------------------------------------

/// Reverse-mode gradient of the loss for an already evaluated forward pass.
void pathwise_backward(models::Model& model, const models::ForwardPass& fp);

models::BoundEstimate pathwise_step(models::Model& model, const models::Batch& batch,
                                    RngStream& rng);

// ---- NVIL -----------------------------------------------------------------

struct NvilConfig {
  std::size_t hidden_units = 100;
  double decay = 0.8;
  double learning_rate = 3e-4;
};

/// Input-dependent baseline (input -> 100 tanh -> scalar) plus running mean c
/// and variance v of the baseline-centred learning signal.
class NvilState {
 public:
  NvilState(std::size_t input_dim, std::uint64_t seed, NvilConfig config = {});

  /// Baseline prediction per row, [batch].
  Tensor baseline(const Tensor& input) const;

  nets::ParamStore& params() noexcept { return store_; }
  const nets::ParamStore& params() const noexcept { return store_; }
  const NvilConfig& config() const noexcept { return config_; }

  double c = 0.0;
  double v = 0.0;
  /// When false, c, v and the baseline are frozen.
  bool adapt = true;

 private:
  friend Tensor nvil_score_grad(const Tensor&, const Tensor&, const Tensor&, const Tensor&,
                                NvilState&);
  NvilConfig config_;
  nets::ParamStore store_;
  nets::Channel net_;
};

/// Score-function gradient of the loss with respect to the Bernoulli logits of
/// q(z | x), [batch, z_dim]:
///   -(signal - baseline(x) - c) / max(1, sqrt(v)) * (z - sigmoid(logits)) / batch.
/// The gradient uses the state as it was on entry; afterwards, if the state
/// adapts, c and v take an exponential-moving-average step and the baseline
/// takes one ADAM step on mean (signal - c - baseline(x))^2.
Tensor nvil_score_grad(const Tensor& signal, const Tensor& z, const Tensor& logits,
                       const Tensor& baseline_input, NvilState& state);

/// NVIL training step for the single-layer Bernoulli model: learning signal
/// log p(x | z); KL(q(z | x) || p(z)) enters analytically.
models::BoundEstimate nvil_step(models::Model& model, const models::Batch& batch,
                                RngStream& rng, NvilState& state);

// ---- Hybrid ---------------------------------------------------------------

/// One gradient estimate of the composite bound for the discrete-z VCAE.
///
/// z is drawn hard from q(z | x). With a Concrete surrogate one s sample is
/// drawn and theta1, psi and phi receive pathwise gradients; with a Bernoulli
/// surrogate (test double) the s expectation is enumerated exactly instead.
/// theta2 receives the NVIL score-function gradient with learning signal
/// -KL(q(s | x) || p(s | z)) plus the closed-form gradient of KL(q(z | x) || p(z)).
models::BoundEstimate hybrid_vcae_step(models::Model& model, const models::Batch& batch,
                                       RngStream& rng, NvilState& state);

/// Dispatches on the variant: pathwise, NVIL, or hybrid. `state` is required
/// for the Bernoulli-z variants.
models::BoundEstimate estimate_gradients(models::Model& model, const models::Batch& batch,
                                         RngStream& rng, NvilState* state);

// ---- Variance probe --------------------------------------------------------

struct VarianceReport {
  std::uint64_t step = 0;
  std::size_t replicas = 0;
  /// Mean over a group's scalars of the per-scalar sample variance; empty
  /// when the model has no parameters in that group.
  std::array<std::optional<double>, kGroupCount> group_variance{};
  std::array<std::size_t, kGroupCount> group_size{};

  std::optional<double> variance(ParamGroup g) const {
    return group_variance[static_cast<std::size_t>(g)];
  }
  /// Size-weighted mean variance over the given groups present in the report.
  std::optional<double> pooled(std::initializer_list<ParamGroup> groups) const;
};

/// Flat gradient for one replica; the replica's noise comes from the stream.
using FlatGradient = std::function<Tensor(RngStream&)>;

/// Runs `replicas` estimates, replica r drawing from rng.split(r), and reduces
/// them in replica-index order. `order` optionally permutes evaluation order;
/// the report does not depend on it.
VarianceReport probe_variance(const nets::ParamStore& layout, const FlatGradient& estimate,
                              std::size_t replicas, const RngStream& rng,
                              std::span<const std::size_t> order = {});

/// Gradient variance of the model's own estimator on a fixed batch. Works on
/// copies: the model and NVIL state are left untouched.
VarianceReport variance_probe(const models::Model& model, const models::Batch& batch,
                              std::size_t replicas, const RngStream& rng,
                              const NvilState* state = nullptr);

}  // namespace vcae::est
