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

#include "vcae/tensor.hpp"

// Log-densities, samplers and KL divergences for the three families the models
// compose. Every function works row-wise on [batch, units] tensors (a rank-1
// tensor is one row) and reduces over units, returning a rank-1 [batch] tensor.

namespace vcae::dist {

struct BernoulliParams {
  Tensor logits;
};

struct DiagGaussianParams {
  Tensor mean;
  Tensor log_std;
};

/// Binary Concrete over the logit-space variable y; the relaxed value is sigmoid(y).
struct BinaryConcreteParams {
  Tensor location_logits;
  double temperature = 0.5;
};

// ---- Bernoulli -------------------------------------------------------------

/// sum_i x_i log sigmoid(l_i) + (1 - x_i) log sigmoid(-l_i); x must be binary.
Tensor bernoulli_logpmf(const BernoulliParams& p, const Tensor& x);

/// d logpmf / d logits = x - sigmoid(l).
Tensor bernoulli_logpmf_grad(const BernoulliParams& p, const Tensor& x);

/// Hard sample 1[u < sigmoid(l)] from uniform01 noise.
Tensor bernoulli_sample(const BernoulliParams& p, const Tensor& uniform);

/// Closed-form KL(q || p), summed over units.
Tensor bernoulli_kl(const BernoulliParams& q, const BernoulliParams& p);

struct BernoulliKlGrad {
  Tensor q_logits;  // sigmoid'(a) (a - b)
  Tensor p_logits;  // sigmoid(b) - sigmoid(a)
};
BernoulliKlGrad bernoulli_kl_grad(const BernoulliParams& q, const BernoulliParams& p);

// ---- Diagonal Gaussian -----------------------------------------------------

/// mean + exp(log_std) * eps.
Tensor gaussian_sample(const DiagGaussianParams& p, const Tensor& eps);

Tensor gaussian_log_density(const DiagGaussianParams& p, const Tensor& z);

/// Log density of the standard normal, summed over units.
Tensor std_normal_log_density(const Tensor& z);

/// 1/2 sum (mu^2 + sigma^2 - 1 - 2 log sigma).
Tensor gaussian_kl_to_standard(const DiagGaussianParams& q);

Tensor gaussian_kl(const DiagGaussianParams& q, const DiagGaussianParams& p);

// ---- Binary Concrete -------------------------------------------------------

/// y = (location + l) / temperature for standard-logistic noise l.
Tensor concrete_sample_logit(const BinaryConcreteParams& p, const Tensor& logistic);

/// log density of y: sum_i log lambda - t_i - 2 softplus(-t_i), t_i = lambda y_i - location_i.
Tensor concrete_log_density_logit(const Tensor& y, const BinaryConcreteParams& p);

struct ConcreteDensityGrad {
  Tensor y;         // lambda (1 - 2 sigmoid(t))
  Tensor location;  // -(1 - 2 sigmoid(t))
};
ConcreteDensityGrad concrete_log_density_grad(const Tensor& y, const BinaryConcreteParams& p);

/// Single-sample estimate log q(y) - log p(y), with y drawn from q.
Tensor concrete_kl_mc(const BinaryConcreteParams& q, const BinaryConcreteParams& p,
                      const Tensor& y);

/// Closed-form CDF of the relaxed value s = sigmoid(y): sigmoid(lambda logit(s) - location).
double concrete_relaxed_cdf(double s, double location, double temperature);

}  // namespace vcae::dist
