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

#include "vcae/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vcae/distributions.hpp"
#include "vcae/errors.hpp"
#include "vcae/numerics.hpp"

namespace vcae::est {

using models::BoundEstimate;
using models::ForwardPass;
using models::KlMode;
using models::LatentFamily;
using models::Model;
using models::Variant;

ParamGroup group_of(const std::string& name) {
  if (name.starts_with("q_s/")) return ParamGroup::Theta1;
  if (name.starts_with("q_z/")) return ParamGroup::Theta2;
  if (name.starts_with("p_s/") || name.starts_with("prior/")) return ParamGroup::Psi;
  if (name.starts_with("p_x/")) return ParamGroup::Phi;
  throw ContractViolation("parameter '" + name + "' belongs to no gradient group");
}

std::string to_string(ParamGroup g) {
  switch (g) {
    case ParamGroup::Theta1: return "theta1";
    case ParamGroup::Theta2: return "theta2";
    case ParamGroup::Psi: return "psi";
    case ParamGroup::Phi: return "phi";
  }
  return "?";
}

namespace {

Tensor loss_upstream(std::size_t rows) {
  return Tensor({rows}, -1.0 / static_cast<double>(rows));
}

}  // namespace

// ---------------------------------------------------------------------------
// Pathwise
// ---------------------------------------------------------------------------

void pathwise_backward(Model& model, const ForwardPass& fp) {
  const auto& spec = model.spec();
  if (!spec.fully_reparameterized()) {
    throw GraphError("pathwise gradient requested for variant " + models::to_string(spec.variant) +
                     ", which has a Bernoulli stochastic node");
  }
  models::backward(model, fp, loss_upstream(fp.rows));
}

BoundEstimate pathwise_step(Model& model, const models::Batch& batch, RngStream& rng) {
  const auto noise = models::draw_noise(model, batch.input.rows(), rng);
  const auto fp = models::forward(model, batch.input, batch.target, noise, KlMode::Analytic);
  pathwise_backward(model, fp);
  return fp.summary();
}

// ---------------------------------------------------------------------------
// NVIL
// ---------------------------------------------------------------------------

NvilState::NvilState(std::size_t input_dim, std::uint64_t seed, NvilConfig config)
    : config_(config) {
  RngStream rng(seed);
  nets::ChannelSpec cs;
  cs.input_dim = input_dim;
  cs.output_dim = 1;
  cs.hidden = nets::Hidden::Nonlinear;
  cs.depth = 1;
  cs.hidden_units = config_.hidden_units;
  cs.head = nets::HeadKind::Bernoulli;
  net_ = nets::build_channel(cs, store_, "baseline", rng);
  store_.set_learning_rate(config_.learning_rate);
}

Tensor NvilState::baseline(const Tensor& input) const {
  const auto o = net_.forward(store_, input);
  return o.out.reshaped({o.out.rows()});
}

Tensor nvil_score_grad(const Tensor& signal, const Tensor& z, const Tensor& logits,
                       const Tensor& baseline_input, NvilState& state) {
  const std::size_t rows = z.rows();
  require_same_shape(z, logits, "nvil_score_grad");
  if (signal.size() != rows || baseline_input.rows() != rows) {
    throw ContractViolation("nvil_score_grad: signal/baseline rows do not match z rows");
  }
  if (!signal.all_finite()) {
    double worst = 0.0;
    for (double s : signal.data()) {
      if (!std::isfinite(s)) worst = s;
    }
    throw TrainingAborted("non-finite NVIL learning signal (" + std::to_string(worst) + ")",
                          state.params()[0].adam.t);
  }

  const auto bo = state.net_.forward(state.store_, baseline_input);
  const double scale = 1.0 / std::max(1.0, std::sqrt(state.v));
  const double inv_rows = 1.0 / static_cast<double>(rows);

  Tensor grad = Tensor::zeros_like(logits);
  Tensor centered({rows});
  for (std::size_t r = 0; r < rows; ++r) {
    centered[r] = signal[r] - bo.out[r];
    const double weight = -(centered[r] - state.c) * scale * inv_rows;
    for (std::size_t j = 0; j < z.cols(); ++j) {
      grad(r, j) = weight * (z(r, j) - sigmoid(logits(r, j)));
    }
  }

  if (state.adapt) {
    const double m = mean(centered);
    double var = 0.0;
    for (double cv : centered.data()) var += (cv - m) * (cv - m);
    var *= inv_rows;
    const double d = state.config_.decay;
    state.c = d * state.c + (1.0 - d) * m;
    state.v = d * state.v + (1.0 - d) * var;

    // Regress the baseline toward signal - c.
    Tensor g_out({rows, 1});
    for (std::size_t r = 0; r < rows; ++r) {
      g_out[r] = -2.0 * (signal[r] - state.c - bo.out[r]) * inv_rows;
    }
    state.store_.zero_grad();
    state.net_.backward(state.store_, bo, g_out, nullptr, false);
    state.store_.step();
  }
  return grad;
}

BoundEstimate nvil_step(Model& model, const models::Batch& batch, RngStream& rng,
                        NvilState& state) {
  if (model.spec().variant != Variant::Nvil) {
    throw ContractViolation("nvil_step needs the nvil variant, got " +
                            models::to_string(model.spec().variant));
  }
  const auto noise = models::draw_noise(model, batch.input.rows(), rng);
  const auto fp = models::forward(model, batch.input, batch.target, noise, KlMode::Analytic);
  models::backward(model, fp, loss_upstream(fp.rows));
  const Tensor g = nvil_score_grad(fp.recon, fp.z, fp.z_mean, batch.input, state);
  model.q_z()->backward(model.params(), *fp.q_z_out, g, nullptr, false);
  return fp.summary();
}

// ---------------------------------------------------------------------------
// Hybrid
// ---------------------------------------------------------------------------

namespace {

/// theta1/psi/phi gradients of E_q(s|x)[log p(x | s)] - KL(q(s | x) || p(s | z))
/// by enumerating every Bernoulli state of s. Returns the per-row
/// conditional objective terms (recon, kl_s).
std::pair<Tensor, Tensor> enumerate_surrogate(Model& model, const models::Batch& batch,
                                              const Tensor& z, const Tensor& upstream) {
  const auto& spec = model.spec();
  auto& store = model.params();
  const std::size_t rows = batch.input.rows();
  const std::size_t d = spec.s_dim;
  if (d > 16) throw ContractViolation("exact surrogate enumeration limited to 16 units");
  const std::size_t states = std::size_t{1} << d;

  const auto qs = model.q_s()->forward(store, batch.input);
  const auto ps = model.p_s()->forward(store, z);

  Tensor s_states({states, d});
  for (std::size_t k = 0; k < states; ++k) {
    for (std::size_t j = 0; j < d; ++j) s_states(k, j) = static_cast<double>((k >> j) & 1u);
  }
  const auto px = model.p_x().forward(store, s_states);

  // log p(x_r | s_k) and q(s_k | x_r)
  Tensor log_px({rows, states});
  Tensor weight({rows, states});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < states; ++k) {
      double lp = 0.0;
      for (std::size_t i = 0; i < spec.target_dim(); ++i) {
        const double l = px.out(k, i);
        lp += batch.target(r, i) == 1.0 ? log_sigmoid(l) : log_sigmoid(-l);
      }
      log_px(r, k) = lp;
      double lq = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double a = qs.out(r, j);
        lq += s_states(k, j) == 1.0 ? log_sigmoid(a) : log_sigmoid(-a);
      }
      weight(r, k) = std::exp(lq);
    }
  }

  Tensor recon({rows});
  Tensor g_a({rows, d});
  Tensor g_logits({states, spec.target_dim()});
  for (std::size_t r = 0; r < rows; ++r) {
    const double u = upstream[r];
    for (std::size_t k = 0; k < states; ++k) {
      const double w = weight(r, k);
      recon[r] += w * log_px(r, k);
      for (std::size_t j = 0; j < d; ++j) {
        g_a(r, j) += u * w * (s_states(k, j) - sigmoid(qs.out(r, j))) * log_px(r, k);
      }
      for (std::size_t i = 0; i < spec.target_dim(); ++i) {
        g_logits(k, i) += u * w * (batch.target(r, i) - sigmoid(px.out(k, i)));
      }
    }
  }
  model.p_x().backward(store, px, g_logits, nullptr, false);

  const Tensor kl_s = dist::bernoulli_kl({qs.out}, {ps.out});
  const auto gk = dist::bernoulli_kl_grad({qs.out}, {ps.out});
  Tensor g_b({rows, d});
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      g_a(r, j) += -upstream[r] * gk.q_logits(r, j);
      g_b(r, j) = -upstream[r] * gk.p_logits(r, j);
    }
  }
  model.q_s()->backward(store, qs, g_a, nullptr, false);
  model.p_s()->backward(store, ps, g_b, nullptr, false);
  return {recon, kl_s};
}

}  // namespace

BoundEstimate hybrid_vcae_step(Model& model, const models::Batch& batch, RngStream& rng,
                               NvilState& state) {
  const auto& spec = model.spec();
  if (spec.variant != Variant::VcaeDiscrete) {
    throw ContractViolation("hybrid_vcae_step needs the vcae_discrete variant, got " +
                            models::to_string(spec.variant));
  }
  const std::size_t rows = batch.input.rows();
  const Tensor upstream = loss_upstream(rows);

  if (spec.s_family() == LatentFamily::Concrete) {
    const auto noise = models::draw_noise(model, rows, rng);
    const auto fp = models::forward(model, batch.input, batch.target, noise, KlMode::Analytic);
    // Pathwise through s with z held fixed; includes the closed-form KL(q(z|x) || p(z)) terms.
    models::backward(model, fp, upstream);
    Tensor signal = fp.kl_s;
    signal *= -1.0;
    const Tensor g = nvil_score_grad(signal, fp.z, fp.z_mean, batch.input, state);
    model.q_z()->backward(model.params(), *fp.q_z_out, g, nullptr, false);
    return fp.summary();
  }

  // Bernoulli surrogate: exact expectation over s given the sampled z.
  auto& store = model.params();
  const auto noise = models::draw_noise(model, rows, rng);
  const auto qz = model.q_z()->forward(store, batch.input);
  const Tensor z = dist::bernoulli_sample({qz.out}, noise.z);
  const auto [recon, kl_s] = enumerate_surrogate(model, batch, z, upstream);

  const Tensor& prior = store[*model.prior_index()].value;
  Tensor prior_rows({rows, spec.z_dim});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(prior.data().begin(), prior.data().end(), prior_rows.row(r).begin());
  }
  const Tensor kl_z = dist::bernoulli_kl({qz.out}, {prior_rows});
  const auto gk = dist::bernoulli_kl_grad({qz.out}, {prior_rows});
  Tensor g_q = gk.q_logits;
  g_q *= 1.0 / static_cast<double>(rows);
  Tensor g_prior = sum_rows(gk.p_logits);
  g_prior *= 1.0 / static_cast<double>(rows);
  store[*model.prior_index()].grad += g_prior;

  Tensor signal = kl_s;
  signal *= -1.0;
  g_q += nvil_score_grad(signal, z, qz.out, batch.input, state);
  model.q_z()->backward(store, qz, g_q, nullptr, false);

  BoundEstimate e;
  e.term_recon = mean(recon);
  e.term_kl_s = mean(kl_s);
  e.term_kl_z = mean(kl_z);
  e.total = e.term_recon - e.term_kl_s - e.term_kl_z;
  return e;
}

BoundEstimate estimate_gradients(Model& model, const models::Batch& batch, RngStream& rng,
                                 NvilState* state) {
  const Variant v = model.spec().variant;
  if (v == Variant::VcaeDiscrete || v == Variant::Nvil) {
    if (state == nullptr) {
      throw ContractViolation("variant " + models::to_string(v) + " needs an NVIL state");
    }
    return v == Variant::Nvil ? nvil_step(model, batch, rng, *state)
                              : hybrid_vcae_step(model, batch, rng, *state);
  }
  return pathwise_step(model, batch, rng);
}

// ---------------------------------------------------------------------------
// Variance probe
// ---------------------------------------------------------------------------

std::optional<double> VarianceReport::pooled(std::initializer_list<ParamGroup> groups) const {
  double acc = 0.0;
  std::size_t n = 0;
  for (ParamGroup g : groups) {
    const auto i = static_cast<std::size_t>(g);
    if (!group_variance[i]) continue;
    acc += *group_variance[i] * static_cast<double>(group_size[i]);
    n += group_size[i];
  }
  if (n == 0) return std::nullopt;
  return acc / static_cast<double>(n);
}

VarianceReport probe_variance(const nets::ParamStore& layout, const FlatGradient& estimate,
                              std::size_t replicas, const RngStream& rng,
                              std::span<const std::size_t> order) {
  if (replicas < 2) throw ContractViolation("variance probe needs at least 2 replicas");
  std::vector<std::size_t> sequence(replicas);
  std::iota(sequence.begin(), sequence.end(), std::size_t{0});
  if (!order.empty()) {
    if (order.size() != replicas) throw ContractViolation("evaluation order must list every replica");
    sequence.assign(order.begin(), order.end());
  }

  const std::size_t width = layout.scalar_count();
  std::vector<Tensor> grads(replicas);
  for (std::size_t r : sequence) {
    if (r >= replicas) throw ContractViolation("evaluation order names an unknown replica");
    RngStream child = rng.split(r);
    grads[r] = estimate(child);
    if (grads[r].size() != width) throw ContractViolation("estimator returned a mis-sized gradient");
  }

  VarianceReport report;
  report.replicas = replicas;
  std::array<double, kGroupCount> sums{};
  std::size_t off = 0;
  for (const auto& p : layout) {
    const auto g = static_cast<std::size_t>(group_of(p.name));
    for (std::size_t i = 0; i < p.value.size(); ++i, ++off) {
      double m = 0.0;
      for (std::size_t r = 0; r < replicas; ++r) m += grads[r][off];
      m /= static_cast<double>(replicas);
      double ss = 0.0;
      for (std::size_t r = 0; r < replicas; ++r) {
        const double d = grads[r][off] - m;
        ss += d * d;
      }
      sums[g] += ss / static_cast<double>(replicas - 1);
      report.group_size[g] += 1;
    }
  }
  for (std::size_t g = 0; g < kGroupCount; ++g) {
    if (report.group_size[g] > 0) {
      report.group_variance[g] = sums[g] / static_cast<double>(report.group_size[g]);
    }
  }
  return report;
}

VarianceReport variance_probe(const Model& model, const models::Batch& batch,
                              std::size_t replicas, const RngStream& rng,
                              const NvilState* state) {
  Model work = model;
  std::optional<NvilState> frozen;
  if (state != nullptr) {
    frozen = *state;
    frozen->adapt = false;
  }
  FlatGradient estimate = [&](RngStream& r) {
    work.params().zero_grad();
    estimate_gradients(work, batch, r, frozen ? &*frozen : nullptr);
    return work.params().flat_grads();
  };
  return probe_variance(model.params(), estimate, replicas, rng);
}

}  // namespace vcae::est
