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

#include "vcae/distributions.hpp"

#include <cmath>
#include <numbers>

#include "vcae/errors.hpp"
#include "vcae/numerics.hpp"

namespace vcae::dist {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

Tensor row_sums_shape(const Tensor& t) { return Tensor({t.rows()}); }

void check_temperature(double temperature) {
  if (!(temperature > 0.0)) {
    throw ContractViolation("concrete temperature must be positive, got " +
                            std::to_string(temperature));
  }
}

}  // namespace

Tensor bernoulli_logpmf(const BernoulliParams& p, const Tensor& x) {
  require_same_shape(p.logits, x, "bernoulli_logpmf");
  Tensor out = row_sums_shape(x);
  const std::size_t c = x.cols();
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double xv = x(r, j);
      const double l = p.logits(r, j);
      if (xv == 1.0) {
        acc += log_sigmoid(l);
      } else if (xv == 0.0) {
        acc += log_sigmoid(-l);
      } else {
        throw ContractViolation("bernoulli_logpmf: non-binary observation " + std::to_string(xv));
      }
    }
    out[r] = acc;
  }
  return out;
}

Tensor bernoulli_logpmf_grad(const BernoulliParams& p, const Tensor& x) {
  require_same_shape(p.logits, x, "bernoulli_logpmf_grad");
  Tensor g = x;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = x[i] - sigmoid(p.logits[i]);
  return g;
}

Tensor bernoulli_sample(const BernoulliParams& p, const Tensor& uniform) {
  require_same_shape(p.logits, uniform, "bernoulli_sample");
  Tensor b = uniform;
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = uniform[i] < sigmoid(p.logits[i]) ? 1.0 : 0.0;
  return b;
}

Tensor bernoulli_kl(const BernoulliParams& q, const BernoulliParams& p) {
  require_same_shape(q.logits, p.logits, "bernoulli_kl");
  Tensor out = row_sums_shape(q.logits);
  const std::size_t c = q.logits.cols();
  for (std::size_t r = 0; r < q.logits.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double a = q.logits(r, j);
      const double b = p.logits(r, j);
      const double qa = sigmoid(a);
      // q (log q - log p) + (1 - q) (log(1 - q) - log(1 - p))
      acc += qa * (log_sigmoid(a) - log_sigmoid(b)) +
             (1.0 - qa) * (log_sigmoid(-a) - log_sigmoid(-b));
    }
    out[r] = acc;
  }
  return out;
}

BernoulliKlGrad bernoulli_kl_grad(const BernoulliParams& q, const BernoulliParams& p) {
  require_same_shape(q.logits, p.logits, "bernoulli_kl_grad");
  BernoulliKlGrad g{q.logits, p.logits};
  for (std::size_t i = 0; i < q.logits.size(); ++i) {
    const double a = q.logits[i];
    const double b = p.logits[i];
    const double qa = sigmoid(a);
    g.q_logits[i] = qa * (1.0 - qa) * (a - b);
    g.p_logits[i] = sigmoid(b) - qa;
  }
  return g;
}

Tensor gaussian_sample(const DiagGaussianParams& p, const Tensor& eps) {
  require_same_shape(p.mean, eps, "gaussian_sample");
  require_same_shape(p.mean, p.log_std, "gaussian_sample");
  Tensor z = p.mean;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += std::exp(p.log_std[i]) * eps[i];
  return z;
}

Tensor gaussian_log_density(const DiagGaussianParams& p, const Tensor& z) {
  require_same_shape(p.mean, z, "gaussian_log_density");
  Tensor out = row_sums_shape(z);
  const std::size_t c = z.cols();
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double ls = p.log_std(r, j);
      const double u = (z(r, j) - p.mean(r, j)) * std::exp(-ls);
      acc += -kHalfLog2Pi - ls - 0.5 * u * u;
    }
    out[r] = acc;
  }
  return out;
}

Tensor std_normal_log_density(const Tensor& z) {
  Tensor out = row_sums_shape(z);
  for (std::size_t r = 0; r < z.rows(); ++r) {
    double acc = 0.0;
    for (double v : z.row(r)) acc += -kHalfLog2Pi - 0.5 * v * v;
    out[r] = acc;
  }
  return out;
}

Tensor gaussian_kl_to_standard(const DiagGaussianParams& q) {
  require_same_shape(q.mean, q.log_std, "gaussian_kl_to_standard");
  Tensor out = row_sums_shape(q.mean);
  const std::size_t c = q.mean.cols();
  for (std::size_t r = 0; r < q.mean.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double mu = q.mean(r, j);
      const double ls = q.log_std(r, j);
      acc += 0.5 * (mu * mu + std::exp(2.0 * ls) - 1.0 - 2.0 * ls);
    }
    out[r] = acc;
  }
  return out;
}

Tensor gaussian_kl(const DiagGaussianParams& q, const DiagGaussianParams& p) {
  require_same_shape(q.mean, p.mean, "gaussian_kl");
  require_same_shape(q.log_std, p.log_std, "gaussian_kl");
  Tensor out = row_sums_shape(q.mean);
  const std::size_t c = q.mean.cols();
  for (std::size_t r = 0; r < q.mean.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double d = q.mean(r, j) - p.mean(r, j);
      const double lq = q.log_std(r, j);
      const double lp = p.log_std(r, j);
      acc += lp - lq + 0.5 * (std::exp(2.0 * lq) + d * d) * std::exp(-2.0 * lp) - 0.5;
    }
    out[r] = acc;
  }
  return out;
}

Tensor concrete_sample_logit(const BinaryConcreteParams& p, const Tensor& logistic) {
  check_temperature(p.temperature);
  require_same_shape(p.location_logits, logistic, "concrete_sample_logit");
  Tensor y = p.location_logits;
  const double inv = 1.0 / p.temperature;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = (y[i] + logistic[i]) * inv;
  return y;
}

Tensor concrete_log_density_logit(const Tensor& y, const BinaryConcreteParams& p) {
  check_temperature(p.temperature);
  require_same_shape(p.location_logits, y, "concrete_log_density_logit");
  const double log_lambda = std::log(p.temperature);
  Tensor out = row_sums_shape(y);
  const std::size_t c = y.cols();
  for (std::size_t r = 0; r < y.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      const double t = p.temperature * y(r, j) - p.location_logits(r, j);
      acc += log_lambda - t - 2.0 * softplus(-t);
    }
    out[r] = acc;
  }
  return out;
}

ConcreteDensityGrad concrete_log_density_grad(const Tensor& y, const BinaryConcreteParams& p) {
  check_temperature(p.temperature);
  require_same_shape(p.location_logits, y, "concrete_log_density_grad");
  ConcreteDensityGrad g{y, y};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double t = p.temperature * y[i] - p.location_logits[i];
    const double df = 1.0 - 2.0 * sigmoid(t);
    g.y[i] = p.temperature * df;
    g.location[i] = -df;
  }
  return g;
}

Tensor concrete_kl_mc(const BinaryConcreteParams& q, const BinaryConcreteParams& p,
                      const Tensor& y) {
  return concrete_log_density_logit(y, q) - concrete_log_density_logit(y, p);
}

double concrete_relaxed_cdf(double s, double location, double temperature) {
  check_temperature(temperature);
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return sigmoid(temperature * logit(s) - location);
}

}  // namespace vcae::dist
