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
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vcae/container.hpp"
#include "vcae/numerics.hpp"
#include "vcae/rng.hpp"
#include "vcae/tensor.hpp"

namespace vcae::nets {

class RegistrationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Load failures share the container's error type; `kind()` tells them apart.
using CheckpointError = pack::FormatError;

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  AdamState adam;
};

/// Named parameters with gradient buffers and per-parameter ADAM state.
/// Iteration follows insertion order.
class ParamStore {
 public:
  /// Registers a parameter; throws RegistrationError on a duplicate name.
  std::size_t add(const std::string& name, Tensor init, double lr = 3e-4);

  bool contains(const std::string& name) const { return index_.contains(name); }
  bool has_prefix(const std::string& prefix) const;
  std::size_t index_of(const std::string& name) const;

  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  Parameter& at(const std::string& name) { return params_[index_of(name)]; }
  const Parameter& at(const std::string& name) const { return params_[index_of(name)]; }

  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const noexcept;
  std::vector<std::string> names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  /// ADAM update of every parameter from its accumulated gradient.
  void step();
  void set_learning_rate(double lr);

  /// Flattened copy of all values (or gradients) in iteration order.
  Tensor flat_values() const;
  Tensor flat_grads() const;
  void set_flat_values(const Tensor& flat);

 private:
  std::vector<Parameter> params_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class Hidden { Linear, Nonlinear };
enum class HeadKind { Bernoulli, Gaussian, Concrete };

inline constexpr double kLogStdMin = -6.0;
inline constexpr double kLogStdMax = 2.0;

struct ChannelSpec {
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  Hidden hidden = Hidden::Linear;
  HeadKind head = HeadKind::Bernoulli;
  double temperature = 0.5;  // Concrete heads
  std::size_t hidden_units = 200;
  /// Number of tanh layers; defaults to 0 for Linear and 2 for Nonlinear.
  std::optional<std::size_t> depth;

  std::size_t tanh_layers() const { return depth.value_or(hidden == Hidden::Nonlinear ? 2 : 0); }
  /// Closed-form parameter count.
  std::size_t parameter_count() const;
};

/// An encoder or decoder: optional tanh trunk followed by an affine head
/// (two heads, mean and log-std, for Gaussian outputs).
class Channel {
 public:
  struct Output {
    Tensor out;                       // logits, location logits, or mean
    Tensor log_std;                   // Gaussian only, clamped
    Tensor raw_log_std;               // Gaussian only, before clamping
    std::vector<Tensor> activations;  // input of every affine in the trunk, then the head input
  };

  Channel() = default;
  Channel(ChannelSpec spec, std::string prefix, ParamStore& store, RngStream& rng);

  const ChannelSpec& spec() const noexcept { return spec_; }
  const std::string& prefix() const noexcept { return prefix_; }

  Output forward(const ParamStore& store, const Tensor& x) const;

  /// Accumulates parameter gradients for upstream gradients on the head
  /// outputs. `grad_log_std` is required for Gaussian heads and ignored
  /// otherwise. Returns the gradient with respect to the input when asked,
  /// otherwise an empty tensor.
  Tensor backward(ParamStore& store, const Output& fwd, const Tensor& grad_out,
                  const Tensor* grad_log_std, bool want_input_grad) const;

 private:
  struct Layer {
    std::size_t w;
    std::size_t b;
  };

  ChannelSpec spec_;
  std::string prefix_;
  std::vector<Layer> trunk_;
  Layer head_{};
  Layer log_std_head_{};
};

/// Registers the channel's parameters under `prefix` and Glorot-initializes them.
Channel build_channel(const ChannelSpec& spec, ParamStore& store, const std::string& prefix,
                      RngStream& rng);

/// Glorot-uniform weights (rank 2), zero biases and vectors (rank 1), zero
/// gradients and fresh optimizer state. Parameter i draws from rng.split(i).
void init_params(ParamStore& store, const RngStream& rng);

/// Fills `w` [fan_in, fan_out] with U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Tensor& w, RngStream& rng);

struct Checkpoint {
  ParamStore params;
  std::string metadata;
};

void checkpoint_save(const ParamStore& store, const std::filesystem::path& path,
                     const std::string& metadata = {});
Checkpoint checkpoint_load(const std::filesystem::path& path);

/// Copies values and optimizer state from `src` into `dst`; the name sets and
/// shapes must match exactly (CheckpointError NameSetMismatch otherwise).
void restore_into(ParamStore& dst, const ParamStore& src);

}  // namespace vcae::nets
