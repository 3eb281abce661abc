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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "vcae/nets.hpp"
#include "vcae/rng.hpp"
#include "vcae/tensor.hpp"

// Model variants and their bounds.
//
// Every variant is a stack of at most two stochastic layers between the data
// x and the top latent z:
//
//   generative   p(z) -> p_psi(s | z) -> p_phi(x | s)
//   inference    q_theta1(s | x),  q_theta2(z | x)     (VAE-Con: q(z | s))
//
// Single-layer baselines keep only one of s and z. Parameters live under the
// prefixes q_s (theta1), q_z (theta2), p_s and prior (psi), and p_x (phi).

namespace vcae::models {

enum class Variant { VAE, ConcreteS, ConcreteZ, VAECon, VcaeGaussian, VcaeDiscrete, Nvil };
enum class Task { GenerativeModeling, StructuredPrediction };
enum class LatentFamily { Gaussian, Bernoulli, Concrete };

/// Family of the surrogate layer s. Bernoulli exists for enumerable test
/// doubles of vcae_discrete and vae_con; it makes z Bernoulli as well, with a
/// learnable prior.
enum class SurrogateFamily { Concrete, Bernoulli };

std::string to_string(Variant v);
std::string to_string(Task t);
std::string to_string(nets::Hidden h);
Variant parse_variant(const std::string& s);
Task parse_task(const std::string& s);
nets::Hidden parse_hidden(const std::string& s);

struct ModelSpec {
  Variant variant = Variant::VcaeGaussian;
  nets::Hidden hidden = nets::Hidden::Linear;
  Task task = Task::GenerativeModeling;
  std::size_t x_dim = 784;
  std::size_t s_dim = 200;
  std::size_t z_dim = 200;
  double temperature = 0.5;
  std::size_t hidden_units = 200;
  SurrogateFamily surrogate = SurrogateFamily::Concrete;

  bool has_s() const;
  bool has_z() const;
  LatentFamily s_family() const;
  LatentFamily z_family() const;
  bool z_conditions_on_s() const { return variant == Variant::VAECon; }
  /// True when every stochastic node is reparameterizable.
  bool fully_reparameterized() const;

  std::size_t input_dim() const;
  std::size_t target_dim() const;

  /// Throws ContractViolation for invalid combinations.
  void validate() const;
};

struct BoundEstimate {
  double total = 0.0;
  double term_recon = 0.0;
  double term_kl_s = 0.0;
  double term_kl_z = 0.0;
};

struct Batch {
  Tensor input;   // what the encoders read
  Tensor target;  // what p(x | .) scores
};

/// Generative modeling: (x, x). Structured prediction: (top half, bottom half)
/// of 28x28 images.
Batch task_adapt(Task task, const Tensor& x_full);

class Model {
 public:
  Model(ModelSpec spec, std::uint64_t init_seed);

  const ModelSpec& spec() const noexcept { return spec_; }
  nets::ParamStore& params() noexcept { return store_; }
  const nets::ParamStore& params() const noexcept { return store_; }

  const std::optional<nets::Channel>& q_s() const noexcept { return q_s_; }
  const std::optional<nets::Channel>& q_z() const noexcept { return q_z_; }
  const std::optional<nets::Channel>& p_s() const noexcept { return p_s_; }
  const nets::Channel& p_x() const noexcept { return p_x_; }
  std::optional<std::size_t> prior_index() const noexcept { return prior_; }

 private:
  ModelSpec spec_;
  nets::ParamStore store_;
  std::optional<nets::Channel> q_s_;
  std::optional<nets::Channel> q_z_;
  std::optional<nets::Channel> p_s_;
  nets::Channel p_x_;
  std::optional<std::size_t> prior_;
};

/// Parameter-free noise driving one evaluation. s: logistic (Concrete) or
/// uniform (Bernoulli); z: standard normal (Gaussian) or uniform (Bernoulli).
struct Noise {
  Tensor s;
  Tensor z;
};

/// Draws s-noise then z-noise, each [rows, dim], from `rng`.
Noise draw_noise(const Model& model, std::size_t rows, RngStream& rng);

/// How KL(q(z | .) || p(z)) enters the bound: closed form, or the
/// single-sample log q(z) - log p(z) at the drawn z.
enum class KlMode { Analytic, Sampled };

/// Everything the backward pass needs from one forward evaluation.
struct ForwardPass {
  std::size_t rows = 0;
  std::size_t repeat = 1;
  KlMode kl_mode = KlMode::Analytic;
  Tensor target;

  std::optional<nets::Channel::Output> q_s_out;
  std::optional<nets::Channel::Output> q_z_out;
  std::optional<nets::Channel::Output> p_s_out;
  nets::Channel::Output p_x_out;

  Tensor s_param;    // q(s | x) location logits or logits, per row
  Tensor s_prior;    // p(s | z) or the fixed-layer prior, per row
  Tensor y;          // s in logit space (Concrete) or the hard sample (Bernoulli)
  Tensor s_value;    // what downstream layers read: sigmoid(y) or the hard sample
  Tensor z_mean;     // Gaussian mean or Bernoulli logits, per row
  Tensor z_log_std;  // Gaussian only
  Tensor z_prior;    // Bernoulli prior logits, per row
  Tensor z_noise;
  Tensor z;

  Tensor recon;  // per row
  Tensor kl_s;
  Tensor kl_z;

  Tensor bound() const;  // recon - kl_s - kl_z, per row
  BoundEstimate summary() const;
};

/// Evaluates the model's bound on `input`/`target` with the given noise.
/// With repeat > 1 each datum is expanded to `repeat` consecutive rows after
/// the x-conditioned encoders run; noise must then have rows * repeat rows.
ForwardPass forward(const Model& model, const Tensor& input, const Tensor& target,
                    const Noise& noise, KlMode kl_mode, std::size_t repeat = 1);

/// Accumulates into the parameter gradients the derivative of
/// sum_r upstream[r] * bound[r], holding hard Bernoulli samples fixed.
void backward(Model& model, const ForwardPass& fp, const Tensor& upstream);

/// Bound for any variant; draws noise from `rng`.
BoundEstimate bound(const Model& model, const Batch& batch, RngStream& rng,
                    KlMode kl_mode = KlMode::Analytic);

// Variant-checked entry points.
BoundEstimate vae_bound(const Model& model, const Batch& batch, RngStream& rng);
BoundEstimate vcae_bound(const Model& model, const Batch& batch, RngStream& rng);
BoundEstimate concrete_training_bound(const Model& model, const Batch& batch, RngStream& rng);
BoundEstimate vae_con_bound(const Model& model, const Batch& batch, RngStream& rng);

/// Per-datum log-mean-exp of K joint importance weights, [batch]. K = 1
/// reproduces the KlMode::Sampled bound under the same noise exactly.
Tensor iwae_estimate(const Model& model, const Batch& batch, std::size_t k, RngStream& rng);

/// Concrete-z test-time estimate: harden y > 0 and score the discrete model
/// p(x | b) p(b) / q(b | x) with Bernoullis induced by the location logits.
Tensor concrete_z_test_eval(const Model& model, const Batch& batch, std::size_t k,
                            RngStream& rng);

/// Hardening rule: 1 if y > 0, else 0 (y = 0 maps to 0).
inline double harden(double y) { return y > 0.0 ? 1.0 : 0.0; }

/// log(mean(exp(v))) over contiguous groups of `k` entries.
Tensor log_mean_exp_groups(const Tensor& v, std::size_t k);

}  // namespace vcae::models
