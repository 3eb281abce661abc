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

#include <cmath>

#include "vcae/distributions.hpp"
#include "vcae/errors.hpp"
#include "vcae/models.hpp"
#include "vcae/numerics.hpp"

namespace vcae::models {

namespace {

Tensor broadcast_row(const Tensor& v, std::size_t rows) {
  Tensor out({rows, v.size()});
  for (std::size_t r = 0; r < rows; ++r) std::copy(v.data().begin(), v.data().end(), out.row(r).begin());
  return out;
}

void check_noise(const Tensor& noise, std::size_t rows, std::size_t cols, const char* which) {
  if (noise.rank() != 2 || noise.rows() != rows || noise.cols() != cols) {
    throw ContractViolation(std::string("forward: ") + which + "-noise has shape " +
                            shape_string(noise.shape()) + ", expected [" + std::to_string(rows) +
                            ", " + std::to_string(cols) + "]");
  }
}

Tensor bernoulli_logpmf_rows(const Tensor& logits, const Tensor& x) {
  return dist::bernoulli_logpmf({logits}, x);
}

}  // namespace

Tensor ForwardPass::bound() const { return recon - kl_s - kl_z; }

BoundEstimate ForwardPass::summary() const {
  BoundEstimate e;
  e.term_recon = mean(recon);
  e.term_kl_s = mean(kl_s);
  e.term_kl_z = mean(kl_z);
  e.total = e.term_recon - e.term_kl_s - e.term_kl_z;
  return e;
}

ForwardPass forward(const Model& model, const Tensor& input, const Tensor& target,
                    const Noise& noise, KlMode kl_mode, std::size_t repeat) {
  const ModelSpec& spec = model.spec();
  const nets::ParamStore& store = model.params();
  if (repeat == 0) throw ContractViolation("forward: repeat must be >= 1");
  if (input.rank() != 2 || input.cols() != spec.input_dim()) {
    throw ContractViolation("forward: input " + shape_string(input.shape()) +
                            " does not match input_dim " + std::to_string(spec.input_dim()));
  }
  if (target.rank() != 2 || target.cols() != spec.target_dim() || target.rows() != input.rows()) {
    throw ContractViolation("forward: target " + shape_string(target.shape()) +
                            " does not match input " + shape_string(input.shape()) +
                            " and target_dim " + std::to_string(spec.target_dim()));
  }

  ForwardPass fp;
  fp.repeat = repeat;
  fp.kl_mode = kl_mode;
  fp.rows = input.rows() * repeat;
  fp.target = repeat_rows(target, repeat);
  const std::size_t rows = fp.rows;

  if (spec.has_s()) {
    fp.q_s_out = model.q_s()->forward(store, input);
    fp.s_param = repeat_rows(fp.q_s_out->out, repeat);
    check_noise(noise.s, rows, spec.s_dim, "s");
    if (spec.s_family() == LatentFamily::Concrete) {
      fp.y = dist::concrete_sample_logit({fp.s_param, spec.temperature}, noise.s);
      fp.s_value = activate(Activation::Sigmoid, fp.y);
    } else {
      fp.y = dist::bernoulli_sample({fp.s_param}, noise.s);
      fp.s_value = fp.y;
    }
  }

  if (spec.has_z()) {
    check_noise(noise.z, rows, spec.z_dim, "z");
    const bool on_s = spec.z_conditions_on_s();
    fp.q_z_out = model.q_z()->forward(store, on_s ? fp.s_value : input);
    const std::size_t rep = on_s ? 1 : repeat;
    fp.z_mean = repeat_rows(fp.q_z_out->out, rep);
    fp.z_noise = noise.z;
    if (spec.z_family() == LatentFamily::Gaussian) {
      fp.z_log_std = repeat_rows(fp.q_z_out->log_std, rep);
      fp.z = dist::gaussian_sample({fp.z_mean, fp.z_log_std}, noise.z);
    } else {
      fp.z = dist::bernoulli_sample({fp.z_mean}, noise.z);
      fp.z_prior = broadcast_row(store[*model.prior_index()].value, rows);
    }
  }

  if (spec.has_s()) {
    if (spec.has_z()) {
      fp.p_s_out = model.p_s()->forward(store, fp.z);
      fp.s_prior = fp.p_s_out->out;
    } else {
      fp.s_prior = broadcast_row(store[*model.prior_index()].value, rows);
    }
  }

  fp.p_x_out = model.p_x().forward(store, spec.has_s() ? fp.s_value : fp.z);
  fp.recon = bernoulli_logpmf_rows(fp.p_x_out.out, fp.target);

  if (spec.has_s()) {
    if (spec.s_family() == LatentFamily::Concrete) {
      fp.kl_s = dist::concrete_kl_mc({fp.s_param, spec.temperature},
                                     {fp.s_prior, spec.temperature}, fp.y);
    } else {
      fp.kl_s = bernoulli_logpmf_rows(fp.s_param, fp.y) - bernoulli_logpmf_rows(fp.s_prior, fp.y);
    }
  } else {
    fp.kl_s = Tensor({rows});
  }

  if (spec.has_z()) {
    if (spec.z_family() == LatentFamily::Gaussian) {
      fp.kl_z = kl_mode == KlMode::Analytic
                    ? dist::gaussian_kl_to_standard({fp.z_mean, fp.z_log_std})
                    : dist::gaussian_log_density({fp.z_mean, fp.z_log_std}, fp.z) -
                          dist::std_normal_log_density(fp.z);
    } else {
      fp.kl_z = kl_mode == KlMode::Analytic
                    ? dist::bernoulli_kl({fp.z_mean}, {fp.z_prior})
                    : bernoulli_logpmf_rows(fp.z_mean, fp.z) -
                          bernoulli_logpmf_rows(fp.z_prior, fp.z);
    }
  } else {
    fp.kl_z = Tensor({rows});
  }
  return fp;
}

void backward(Model& model, const ForwardPass& fp, const Tensor& upstream) {
  const ModelSpec& spec = model.spec();
  nets::ParamStore& store = model.params();
  if (fp.repeat != 1) throw ContractViolation("backward: repeated evaluations carry no gradient");
  if (upstream.size() != fp.rows) {
    throw ContractViolation("backward: upstream has " + std::to_string(upstream.size()) +
                            " entries for " + std::to_string(fp.rows) + " rows");
  }
  const std::size_t rows = fp.rows;
  const bool s_concrete = spec.has_s() && spec.s_family() == LatentFamily::Concrete;
  const bool z_gaussian = spec.has_z() && spec.z_family() == LatentFamily::Gaussian;
  const double lambda = spec.temperature;
  auto u = [&](std::size_t r) { return upstream[r]; };

  // Reconstruction: d recon / d logits = x - sigmoid(l).
  Tensor g_logits = dist::bernoulli_logpmf_grad({fp.p_x_out.out}, fp.target);
  for (std::size_t r = 0; r < rows; ++r) {
    for (double& v : g_logits.row(r)) v *= u(r);
  }
  const bool bottom_differentiable = spec.has_s() ? s_concrete : z_gaussian;
  Tensor g_bottom = model.p_x().backward(store, fp.p_x_out, g_logits, nullptr, bottom_differentiable);

  Tensor g_s_value;  // gradient on the value downstream layers read
  Tensor g_y;
  Tensor g_s_param;
  Tensor g_z;
  if (spec.has_s()) {
    g_s_param = Tensor({rows, spec.s_dim});
    g_y = Tensor({rows, spec.s_dim});
    g_s_value = s_concrete ? std::move(g_bottom) : Tensor({rows, spec.s_dim});
  } else if (z_gaussian) {
    g_z = std::move(g_bottom);
  }
  if (spec.has_z() && g_z.empty()) g_z = Tensor({rows, spec.z_dim});

  // KL for s: bound carries -(log q(s) - log p(s | .)).
  if (spec.has_s()) {
    Tensor g_prior({rows, spec.s_dim});
    if (s_concrete) {
      const auto gq = dist::concrete_log_density_grad(fp.y, {fp.s_param, lambda});
      const auto gp = dist::concrete_log_density_grad(fp.y, {fp.s_prior, lambda});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < spec.s_dim; ++j) {
          g_y(r, j) += -u(r) * (gq.y(r, j) - gp.y(r, j));
          g_s_param(r, j) += -u(r) * gq.location(r, j);
          g_prior(r, j) = u(r) * gp.location(r, j);
        }
      }
    } else {
      const Tensor dq = dist::bernoulli_logpmf_grad({fp.s_param}, fp.y);
      const Tensor dp = dist::bernoulli_logpmf_grad({fp.s_prior}, fp.y);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < spec.s_dim; ++j) {
          g_s_param(r, j) += -u(r) * dq(r, j);
          g_prior(r, j) = u(r) * dp(r, j);
        }
      }
    }
    if (spec.has_z()) {
      Tensor gz = model.p_s()->backward(store, *fp.p_s_out, g_prior, nullptr, z_gaussian);
      if (z_gaussian) g_z += gz;
    } else {
      store[*model.prior_index()].grad += sum_rows(g_prior);
    }
  }

  // KL for z and the z sample.
  if (spec.has_z()) {
    Tensor g_mean({rows, spec.z_dim});
    if (z_gaussian) {
      Tensor g_log_std({rows, spec.z_dim});
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < spec.z_dim; ++j) {
          const double mu = fp.z_mean(r, j);
          const double ls = fp.z_log_std(r, j);
          const double var = std::exp(2.0 * ls);
          if (fp.kl_mode == KlMode::Analytic) {
            g_mean(r, j) += -u(r) * mu;
            g_log_std(r, j) += -u(r) * (var - 1.0);
          } else {
            const double z = fp.z(r, j);
            const double d = z - mu;
            g_z(r, j) += -u(r) * (-d / var + z);
            g_mean(r, j) += -u(r) * (d / var);
            g_log_std(r, j) += -u(r) * (-1.0 + d * d / var);
          }
          // z = mean + exp(log_std) * eps
          g_mean(r, j) += g_z(r, j);
          g_log_std(r, j) += g_z(r, j) * std::exp(ls) * fp.z_noise(r, j);
        }
      }
      const bool into_s = spec.z_conditions_on_s() && s_concrete;
      Tensor gs = model.q_z()->backward(store, *fp.q_z_out, g_mean, &g_log_std, into_s);
      if (into_s) g_s_value += gs;
    } else {
      Tensor g_prior({spec.z_dim});
      if (fp.kl_mode == KlMode::Analytic) {
        const auto g = dist::bernoulli_kl_grad({fp.z_mean}, {fp.z_prior});
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < spec.z_dim; ++j) {
            g_mean(r, j) += -u(r) * g.q_logits(r, j);
            g_prior[j] += -u(r) * g.p_logits(r, j);
          }
        }
      } else {
        const Tensor dq = dist::bernoulli_logpmf_grad({fp.z_mean}, fp.z);
        const Tensor dp = dist::bernoulli_logpmf_grad({fp.z_prior}, fp.z);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t j = 0; j < spec.z_dim; ++j) {
            g_mean(r, j) += -u(r) * dq(r, j);
            g_prior[j] += u(r) * dp(r, j);
          }
        }
      }
      store[*model.prior_index()].grad += g_prior;
      // Hard samples are held fixed; an s-conditioned q(z | s) still sees s as input.
      const bool into_s = spec.z_conditions_on_s() && s_concrete;
      Tensor gs = model.q_z()->backward(store, *fp.q_z_out, g_mean, nullptr, into_s);
      if (into_s) g_s_value += gs;
    }
  }

  // s sample: s = sigmoid(y), y = (location + l) / lambda.
  if (spec.has_s()) {
    if (s_concrete) {
      for (std::size_t i = 0; i < g_y.size(); ++i) {
        const double s = fp.s_value[i];
        g_y[i] += g_s_value[i] * s * (1.0 - s);
        g_s_param[i] += g_y[i] / lambda;
      }
    }
    model.q_s()->backward(store, *fp.q_s_out, g_s_param, nullptr, false);
  }
}

}  // namespace vcae::models
