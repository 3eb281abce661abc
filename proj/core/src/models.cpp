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

#include "vcae/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vcae/distributions.hpp"
#include "vcae/errors.hpp"

namespace vcae::models {

namespace {

constexpr std::size_t kImageSide = 28;
constexpr std::size_t kImagePixels = kImageSide * kImageSide;
constexpr std::size_t kHalfPixels = kImagePixels / 2;

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::VAE: return "vae";
    case Variant::ConcreteS: return "concrete_s";
    case Variant::ConcreteZ: return "concrete_z";
    case Variant::VAECon: return "vae_con";
    case Variant::VcaeGaussian: return "vcae_gaussian";
    case Variant::VcaeDiscrete: return "vcae_discrete";
    case Variant::Nvil: return "nvil";
  }
  return "?";
}

std::string to_string(Task t) {
  return t == Task::GenerativeModeling ? "generative" : "structured";
}

std::string to_string(nets::Hidden h) { return h == nets::Hidden::Linear ? "linear" : "nonlinear"; }

Variant parse_variant(const std::string& s) {
  for (Variant v : {Variant::VAE, Variant::ConcreteS, Variant::ConcreteZ, Variant::VAECon,
                    Variant::VcaeGaussian, Variant::VcaeDiscrete, Variant::Nvil}) {
    if (to_string(v) == s) return v;
  }
  throw ContractViolation("unknown variant '" + s +
                          "' (expected vae, concrete_s, concrete_z, vae_con, vcae_gaussian, "
                          "vcae_discrete, nvil)");
}

Task parse_task(const std::string& s) {
  if (s == "generative") return Task::GenerativeModeling;
  if (s == "structured") return Task::StructuredPrediction;
  throw ContractViolation("unknown task '" + s + "' (expected generative or structured)");
}

nets::Hidden parse_hidden(const std::string& s) {
  if (s == "linear") return nets::Hidden::Linear;
  if (s == "nonlinear") return nets::Hidden::Nonlinear;
  throw ContractViolation("unknown hidden kind '" + s + "' (expected linear or nonlinear)");
}

// ---------------------------------------------------------------------------
// ModelSpec
// ---------------------------------------------------------------------------

bool ModelSpec::has_s() const {
  return variant != Variant::VAE && variant != Variant::Nvil;
}

bool ModelSpec::has_z() const {
  return variant != Variant::ConcreteS && variant != Variant::ConcreteZ;
}

LatentFamily ModelSpec::s_family() const {
  return surrogate == SurrogateFamily::Concrete ? LatentFamily::Concrete : LatentFamily::Bernoulli;
}

LatentFamily ModelSpec::z_family() const {
  if (variant == Variant::VcaeDiscrete || variant == Variant::Nvil) return LatentFamily::Bernoulli;
  return surrogate == SurrogateFamily::Bernoulli ? LatentFamily::Bernoulli : LatentFamily::Gaussian;
}

bool ModelSpec::fully_reparameterized() const {
  if (has_s() && s_family() != LatentFamily::Concrete) return false;
  if (has_z() && z_family() != LatentFamily::Gaussian) return false;
  return true;
}

std::size_t ModelSpec::input_dim() const {
  return task == Task::StructuredPrediction ? kHalfPixels : x_dim;
}

std::size_t ModelSpec::target_dim() const {
  return task == Task::StructuredPrediction ? kHalfPixels : x_dim;
}

void ModelSpec::validate() const {
  if (x_dim == 0 || (has_s() && s_dim == 0) || (has_z() && z_dim == 0)) {
    throw ContractViolation("model dimensions must be positive");
  }
  if (!(temperature > 0.0)) throw ContractViolation("temperature must be positive");
  if (hidden == nets::Hidden::Nonlinear && hidden_units == 0) {
    throw ContractViolation("nonlinear channels need positive hidden_units");
  }
  if (task == Task::StructuredPrediction && x_dim != kImagePixels) {
    throw ContractViolation("structured prediction needs 784-pixel images, got x_dim " +
                            std::to_string(x_dim));
  }
  if (surrogate == SurrogateFamily::Bernoulli && variant != Variant::VcaeDiscrete &&
      variant != Variant::VAECon) {
    throw ContractViolation("a Bernoulli surrogate is only defined for vcae_discrete and vae_con, not " +
                            to_string(variant));
  }
}

Batch task_adapt(Task task, const Tensor& x_full) {
  if (task == Task::GenerativeModeling) return {x_full, x_full};
  if (x_full.rank() != 2 || x_full.cols() != kImagePixels) {
    throw ContractViolation("task_adapt: structured prediction needs [n, 784] images, got " +
                            shape_string(x_full.shape()));
  }
  return {slice_cols(x_full, 0, kHalfPixels), slice_cols(x_full, kHalfPixels, kImagePixels)};
}

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

Model::Model(ModelSpec spec, std::uint64_t init_seed) : spec_(std::move(spec)) {
  spec_.validate();
  RngStream rng(init_seed);
  auto channel = [&](std::size_t in, std::size_t out, nets::Hidden hidden, nets::HeadKind head,
                     const char* prefix) {
    nets::ChannelSpec cs;
    cs.input_dim = in;
    cs.output_dim = out;
    cs.hidden = hidden;
    cs.head = head;
    cs.temperature = spec_.temperature;
    cs.hidden_units = spec_.hidden_units;
    return nets::build_channel(cs, store_, prefix, rng);
  };
  const auto s_head = spec_.s_family() == LatentFamily::Concrete ? nets::HeadKind::Concrete
                                                                  : nets::HeadKind::Bernoulli;
  const auto z_head = spec_.z_family() == LatentFamily::Gaussian ? nets::HeadKind::Gaussian
                                                                  : nets::HeadKind::Bernoulli;
  if (spec_.has_s()) {
    q_s_ = channel(spec_.input_dim(), spec_.s_dim, spec_.hidden, s_head, "q_s");
  }
  if (spec_.has_z()) {
    const std::size_t in = spec_.z_conditions_on_s() ? spec_.s_dim : spec_.input_dim();
    q_z_ = channel(in, spec_.z_dim, spec_.hidden, z_head, "q_z");
  }
  if (spec_.has_s() && spec_.has_z()) {
    // p(s | z) is a single affine layer regardless of the Linear/Nonlinear choice.
    p_s_ = channel(spec_.z_dim, spec_.s_dim, nets::Hidden::Linear, s_head, "p_s");
  }
  p_x_ = channel(spec_.has_s() ? spec_.s_dim : spec_.z_dim, spec_.target_dim(), spec_.hidden,
                 nets::HeadKind::Bernoulli, "p_x");
  if (spec_.has_s() && !spec_.has_z()) {
    prior_ = store_.add("prior/logits", Tensor({spec_.s_dim}));
  } else if (spec_.has_z() && spec_.z_family() == LatentFamily::Bernoulli) {
    prior_ = store_.add("prior/logits", Tensor({spec_.z_dim}));
  }
}

Noise draw_noise(const Model& model, std::size_t rows, RngStream& rng) {
  const ModelSpec& spec = model.spec();
  Noise n;
  if (spec.has_s()) {
    n.s = sample(rng,
                 spec.s_family() == LatentFamily::Concrete ? SampleKind::StdLogistic
                                                           : SampleKind::Uniform01,
                 {rows, spec.s_dim});
  }
  if (spec.has_z()) {
    n.z = sample(rng,
                 spec.z_family() == LatentFamily::Gaussian ? SampleKind::StdNormal
                                                           : SampleKind::Uniform01,
                 {rows, spec.z_dim});
  }
  return n;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

BoundEstimate bound(const Model& model, const Batch& batch, RngStream& rng, KlMode kl_mode) {
  const Noise noise = draw_noise(model, batch.input.rows(), rng);
  return forward(model, batch.input, batch.target, noise, kl_mode).summary();
}

namespace {

void require_variant(const Model& model, std::initializer_list<Variant> allowed, const char* op) {
  const Variant v = model.spec().variant;
  if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    throw ContractViolation(std::string(op) + " does not apply to variant " + to_string(v));
  }
}

}  // namespace

BoundEstimate vae_bound(const Model& model, const Batch& batch, RngStream& rng) {
  require_variant(model, {Variant::VAE}, "vae_bound");
  return bound(model, batch, rng);
}

BoundEstimate vcae_bound(const Model& model, const Batch& batch, RngStream& rng) {
  require_variant(model, {Variant::VcaeGaussian, Variant::VcaeDiscrete}, "vcae_bound");
  return bound(model, batch, rng);
}

BoundEstimate concrete_training_bound(const Model& model, const Batch& batch, RngStream& rng) {
  require_variant(model, {Variant::ConcreteS, Variant::ConcreteZ}, "concrete_training_bound");
  return bound(model, batch, rng);
}

BoundEstimate vae_con_bound(const Model& model, const Batch& batch, RngStream& rng) {
  require_variant(model, {Variant::VAECon}, "vae_con_bound");
  return bound(model, batch, rng);
}

Tensor log_mean_exp_groups(const Tensor& v, std::size_t k) {
  if (k == 0 || v.size() % k != 0) throw ContractViolation("log_mean_exp_groups: bad group size");
  const std::size_t groups = v.size() / k;
  Tensor out({groups});
  for (std::size_t g = 0; g < groups; ++g) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < k; ++i) m = std::max(m, v[g * k + i]);
    if (!std::isfinite(m)) {
      out[g] = m;
      continue;
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) acc += std::exp(v[g * k + i] - m);
    out[g] = m + std::log(acc / static_cast<double>(k));
  }
  return out;
}

Tensor iwae_estimate(const Model& model, const Batch& batch, std::size_t k, RngStream& rng) {
  if (k == 0) throw ContractViolation("iwae_estimate: K must be >= 1");
  const Noise noise = draw_noise(model, batch.input.rows() * k, rng);
  const ForwardPass fp = forward(model, batch.input, batch.target, noise, KlMode::Sampled, k);
  return log_mean_exp_groups(fp.bound(), k);
}

Tensor concrete_z_test_eval(const Model& model, const Batch& batch, std::size_t k,
                            RngStream& rng) {
  require_variant(model, {Variant::ConcreteZ}, "concrete_z_test_eval");
  if (k == 0) throw ContractViolation("concrete_z_test_eval: K must be >= 1");
  const ModelSpec& spec = model.spec();
  const nets::ParamStore& store = model.params();
  const std::size_t rows = batch.input.rows() * k;

  const auto q = model.q_s()->forward(store, batch.input);
  const Tensor location = repeat_rows(q.out, k);
  const Tensor noise = sample(rng, SampleKind::StdLogistic, {rows, spec.s_dim});
  const Tensor y = dist::concrete_sample_logit({location, spec.temperature}, noise);
  Tensor b = y;
  for (double& v : b.data()) v = harden(v);

  const Tensor& prior = store[*model.prior_index()].value;
  Tensor prior_rows({rows, spec.s_dim});
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy(prior.data().begin(), prior.data().end(), prior_rows.row(r).begin());
  }
  const auto px = model.p_x().forward(store, b);
  const Tensor target = repeat_rows(batch.target, k);
  const Tensor log_w = dist::bernoulli_logpmf({px.out}, target) +
                       dist::bernoulli_logpmf({prior_rows}, b) -
                       dist::bernoulli_logpmf({location}, b);
  return log_mean_exp_groups(log_w, k);
}

}  // namespace vcae::models
