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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "vcae/rng.hpp"
#include "vcae/tensor.hpp"

namespace vcae {

// ---------------------------------------------------------------------------
// Scalar nonlinearities
// ---------------------------------------------------------------------------

inline double sigmoid(double y) noexcept {
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

/// max(y, 0) + log1p(exp(-|y|)); never overflows.
inline double softplus(double y) noexcept {
  return std::max(y, 0.0) + std::log1p(std::exp(-std::abs(y)));
}

inline double log_sigmoid(double y) noexcept { return -softplus(-y); }

/// log p - log(1 - p); throws DomainError outside (0, 1).
double logit(double p);

// ---------------------------------------------------------------------------
// Affine map
// ---------------------------------------------------------------------------

/// Y = X W + b, with W laid out [in, out] and b broadcast over the batch.
Tensor affine(const Tensor& w, const Tensor& b, const Tensor& x);

struct AffineGrads {
  Tensor w;
  Tensor b;
  Tensor x;
};

AffineGrads affine_vjp(const Tensor& w, const Tensor& x, const Tensor& grad_out);

/// Accumulating form used by the network layers: grad_w += X^T G, grad_b += sum_rows(G),
/// and, when `grad_x` is non-null, *grad_x = G W^T.
void affine_backward(const Tensor& w, const Tensor& x, const Tensor& grad_out, Tensor& grad_w,
                     Tensor& grad_b, Tensor* grad_x);

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

enum class Activation { Sigmoid, Tanh, Softplus, LogSigmoid, Logit };

Tensor activate(Activation kind, const Tensor& x);

/// Vector-Jacobian product at input `x` for upstream gradient `grad_out`.
Tensor activation_vjp(Activation kind, const Tensor& x, const Tensor& grad_out);

// ---------------------------------------------------------------------------
// Random draws
// ---------------------------------------------------------------------------

enum class SampleKind { Uniform01, StdNormal, StdLogistic };

Tensor sample(RngStream& stream, SampleKind kind, Tensor::Shape shape);

// ---------------------------------------------------------------------------
// Gradient oracle
// ---------------------------------------------------------------------------

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h for every coordinate.
Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h = 1e-5);

// ---------------------------------------------------------------------------
// ADAM
// ---------------------------------------------------------------------------

struct AdamState {
  Tensor m;
  Tensor v;
  std::uint64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 3e-4;

  static AdamState for_param(const Tensor& param, double lr = 3e-4);
};

/// One bias-corrected ADAM update of `param` in place. A non-finite gradient
/// throws TrainingAborted carrying the step index the update would have had.
void adam_step(Tensor& param, const Tensor& grad, AdamState& state);

}  // namespace vcae
