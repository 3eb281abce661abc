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

#include "vcae/nets.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vcae/errors.hpp"

namespace vcae::nets {

// ---------------------------------------------------------------------------
// ParamStore
// ---------------------------------------------------------------------------

std::size_t ParamStore::add(const std::string& name, Tensor init, double lr) {
  if (index_.contains(name)) throw RegistrationError("parameter '" + name + "' already registered");
  Parameter p;
  p.name = name;
  p.grad = Tensor::zeros_like(init);
  p.adam = AdamState::for_param(init, lr);
  p.value = std::move(init);
  params_.push_back(std::move(p));
  index_.emplace(name, params_.size() - 1);
  return params_.size() - 1;
}

bool ParamStore::has_prefix(const std::string& prefix) const {
  return std::any_of(params_.begin(), params_.end(),
                     [&](const Parameter& p) { return p.name.starts_with(prefix); });
}

std::size_t ParamStore::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractViolation("unknown parameter '" + name + "'");
  return it->second;
}

std::size_t ParamStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.push_back(p.name);
  return out;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

void ParamStore::step() {
  for (auto& p : params_) adam_step(p.value, p.grad, p.adam);
}

void ParamStore::set_learning_rate(double lr) {
  for (auto& p : params_) p.adam.lr = lr;
}

Tensor ParamStore::flat_values() const {
  Tensor flat({scalar_count()});
  std::size_t off = 0;
  for (const auto& p : params_) {
    std::copy(p.value.data().begin(), p.value.data().end(), flat.data().begin() + off);
    off += p.value.size();
  }
  return flat;
}

Tensor ParamStore::flat_grads() const {
  Tensor flat({scalar_count()});
  std::size_t off = 0;
  for (const auto& p : params_) {
    std::copy(p.grad.data().begin(), p.grad.data().end(), flat.data().begin() + off);
    off += p.grad.size();
  }
  return flat;
}

void ParamStore::set_flat_values(const Tensor& flat) {
  if (flat.size() != scalar_count()) {
    throw ContractViolation("set_flat_values: expected " + std::to_string(scalar_count()) +
                            " values, got " + std::to_string(flat.size()));
  }
  std::size_t off = 0;
  for (auto& p : params_) {
    std::copy(flat.data().begin() + off, flat.data().begin() + off + p.value.size(),
              p.value.data().begin());
    off += p.value.size();
  }
}

// ---------------------------------------------------------------------------
// Channels
// ---------------------------------------------------------------------------

std::size_t ChannelSpec::parameter_count() const {
  std::size_t n = 0;
  std::size_t in = input_dim;
  for (std::size_t l = 0; l < tanh_layers(); ++l) {
    n += in * hidden_units + hidden_units;
    in = hidden_units;
  }
  const std::size_t head = in * output_dim + output_dim;
  return n + (this->head == HeadKind::Gaussian ? 2 * head : head);
}

void glorot_uniform(Tensor& w, RngStream& rng) {
  const double fan_in = static_cast<double>(w.rows());
  const double fan_out = static_cast<double>(w.cols());
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  for (double& v : w.data()) v = (2.0 * rng.uniform01() - 1.0) * a;
}

Channel::Channel(ChannelSpec spec, std::string prefix, ParamStore& store, RngStream& rng)
    : spec_(std::move(spec)), prefix_(std::move(prefix)) {
  if (spec_.input_dim == 0 || spec_.output_dim == 0) {
    throw ContractViolation("channel '" + prefix_ + "' needs positive input and output dims");
  }
  if (spec_.tanh_layers() > 0 && spec_.hidden_units == 0) {
    throw ContractViolation("channel '" + prefix_ + "' needs positive hidden units");
  }
  if (store.has_prefix(prefix_ + "/")) {
    throw RegistrationError("channel prefix '" + prefix_ + "' already in use");
  }
  auto make = [&](const std::string& name, std::size_t in, std::size_t out) {
    Tensor w({in, out});
    glorot_uniform(w, rng);
    Layer l;
    l.w = store.add(prefix_ + "/" + name + "/W", std::move(w));
    l.b = store.add(prefix_ + "/" + name + "/b", Tensor({out}));
    return l;
  };
  std::size_t in = spec_.input_dim;
  for (std::size_t l = 0; l < spec_.tanh_layers(); ++l) {
    trunk_.push_back(make("h" + std::to_string(l), in, spec_.hidden_units));
    in = spec_.hidden_units;
  }
  if (spec_.head == HeadKind::Gaussian) {
    head_ = make("mean", in, spec_.output_dim);
    log_std_head_ = make("log_std", in, spec_.output_dim);
  } else {
    head_ = make("out", in, spec_.output_dim);
  }
}

Channel::Output Channel::forward(const ParamStore& store, const Tensor& x) const {
  if (x.rank() != 2 || x.cols() != spec_.input_dim) {
    throw ContractViolation("channel '" + prefix_ + "': input " + shape_string(x.shape()) +
                            " does not match input_dim " + std::to_string(spec_.input_dim));
  }
  Output o;
  o.activations.reserve(trunk_.size() + 1);
  o.activations.push_back(x);
  for (const auto& layer : trunk_) {
    Tensor h = affine(store[layer.w].value, store[layer.b].value, o.activations.back());
    for (double& v : h.data()) v = std::tanh(v);
    o.activations.push_back(std::move(h));
  }
  const Tensor& top = o.activations.back();
  o.out = affine(store[head_.w].value, store[head_.b].value, top);
  if (spec_.head == HeadKind::Gaussian) {
    o.raw_log_std = affine(store[log_std_head_.w].value, store[log_std_head_.b].value, top);
    o.log_std = o.raw_log_std;
    for (double& v : o.log_std.data()) v = std::clamp(v, kLogStdMin, kLogStdMax);
  }
  return o;
}

Tensor Channel::backward(ParamStore& store, const Output& fwd, const Tensor& grad_out,
                         const Tensor* grad_log_std, bool want_input_grad) const {
  const bool has_trunk = !trunk_.empty();
  const bool need_top_grad = has_trunk || want_input_grad;
  const Tensor& top = fwd.activations.back();

  Tensor grad_top;
  affine_backward(store[head_.w].value, top, grad_out, store[head_.w].grad, store[head_.b].grad,
                  need_top_grad ? &grad_top : nullptr);

  if (spec_.head == HeadKind::Gaussian) {
    if (grad_log_std == nullptr) {
      throw ContractViolation("channel '" + prefix_ + "': Gaussian head needs a log-std gradient");
    }
    Tensor g = *grad_log_std;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double r = fwd.raw_log_std[i];
      if (r < kLogStdMin || r > kLogStdMax) g[i] = 0.0;
    }
    Tensor grad_top2;
    affine_backward(store[log_std_head_.w].value, top, g, store[log_std_head_.w].grad,
                    store[log_std_head_.b].grad, need_top_grad ? &grad_top2 : nullptr);
    if (need_top_grad) grad_top += grad_top2;
  }
  if (!need_top_grad) return {};

  Tensor grad = std::move(grad_top);
  for (std::size_t l = trunk_.size(); l-- > 0;) {
    // activations[l + 1] = tanh(pre); d tanh = 1 - tanh^2
    const Tensor& h = fwd.activations[l + 1];
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] *= 1.0 - h[i] * h[i];
    const bool need_below = l > 0 || want_input_grad;
    Tensor below;
    affine_backward(store[trunk_[l].w].value, fwd.activations[l], grad, store[trunk_[l].w].grad,
                    store[trunk_[l].b].grad, need_below ? &below : nullptr);
    if (!need_below) return {};
    grad = std::move(below);
  }
  return grad;
}

Channel build_channel(const ChannelSpec& spec, ParamStore& store, const std::string& prefix,
                      RngStream& rng) {
  return Channel(spec, prefix, store, rng);
}

void init_params(ParamStore& store, const RngStream& rng) {
  for (std::size_t i = 0; i < store.size(); ++i) {
    Parameter& p = store[i];
    if (p.value.rank() == 2) {
      RngStream child = rng.split(i);
      glorot_uniform(p.value, child);
    } else {
      p.value.fill(0.0);
    }
    p.grad.fill(0.0);
    p.adam = AdamState::for_param(p.value, p.adam.lr);
  }
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

void checkpoint_save(const ParamStore& store, const std::filesystem::path& path,
                     const std::string& metadata) {
  pack::Container c;
  c.kind = pack::ContainerKind::Checkpoint;
  c.metadata = metadata;
  for (const auto& p : store) c.entries.push_back({p.name, p.value, p.adam});
  pack::write_file(c, path);
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  pack::Container c = pack::read_file(path);
  if (c.kind != pack::ContainerKind::Checkpoint) {
    throw CheckpointError(CheckpointError::Kind::WrongKind,
                          path.string() + " is not a checkpoint container");
  }
  Checkpoint ck;
  ck.metadata = std::move(c.metadata);
  for (auto& e : c.entries) {
    const double lr = e.adam ? e.adam->lr : 3e-4;
    const std::size_t i = ck.params.add(e.name, std::move(e.value), lr);
    if (e.adam) ck.params[i].adam = std::move(*e.adam);
  }
  return ck;
}

void restore_into(ParamStore& dst, const ParamStore& src) {
  const auto a = dst.names();
  const auto b = src.names();
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  if (sa != sb) {
    std::string diff;
    for (const auto& n : sa) {
      if (!sb.contains(n)) diff += " missing:" + n;
    }
    for (const auto& n : sb) {
      if (!sa.contains(n)) diff += " unexpected:" + n;
    }
    if (diff.size() > 400) diff = diff.substr(0, 400) + " ...";
    throw CheckpointError(CheckpointError::Kind::NameSetMismatch,
                          "checkpoint parameter names do not match the model:" + diff);
  }
  for (auto& p : dst) {
    const Parameter& q = src.at(p.name);
    if (q.value.shape() != p.value.shape()) {
      throw CheckpointError(CheckpointError::Kind::NameSetMismatch,
                            "parameter '" + p.name + "' has shape " +
                                shape_string(q.value.shape()) + ", model expects " +
                                shape_string(p.value.shape()));
    }
    p.value = q.value;
    p.adam = q.adam;
    p.grad.fill(0.0);
  }
}

}  // namespace vcae::nets
