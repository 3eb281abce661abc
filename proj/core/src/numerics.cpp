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

#include "vcae/numerics.hpp"

#include <Eigen/Core>

#include "vcae/errors.hpp"

namespace vcae {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(const Tensor& t) {
  return ConstMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                  static_cast<Eigen::Index>(t.cols()));
}

MutMap as_matrix(Tensor& t) {
  return MutMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

void check_affine_shapes(const Tensor& w, const Tensor& x, const char* where) {
  if (w.rank() != 2 || x.rank() != 2 || x.cols() != w.rows()) {
    throw ContractViolation(std::string(where) + ": X " + shape_string(x.shape()) +
                            " does not conform to W " + shape_string(w.shape()));
  }
}

}  // namespace

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit: argument " + std::to_string(p) + " outside (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

Tensor affine(const Tensor& w, const Tensor& b, const Tensor& x) {
  check_affine_shapes(w, x, "affine");
  if (b.size() != w.cols()) {
    throw ContractViolation("affine: bias " + shape_string(b.shape()) + " does not match W " +
                            shape_string(w.shape()));
  }
  Tensor y({x.rows(), w.cols()});
  auto ym = as_matrix(y);
  ym.noalias() = as_matrix(x) * as_matrix(w);
  Eigen::Map<const Eigen::RowVectorXd> bv(b.data().data(), static_cast<Eigen::Index>(b.size()));
  ym.rowwise() += bv;
  return y;
}

AffineGrads affine_vjp(const Tensor& w, const Tensor& x, const Tensor& grad_out) {
  AffineGrads g{Tensor::zeros_like(w), Tensor({w.cols()}), Tensor()};
  affine_backward(w, x, grad_out, g.w, g.b, &g.x);
  return g;
}

void affine_backward(const Tensor& w, const Tensor& x, const Tensor& grad_out, Tensor& grad_w,
                     Tensor& grad_b, Tensor* grad_x) {
  check_affine_shapes(w, x, "affine_backward");
  if (grad_out.rank() != 2 || grad_out.rows() != x.rows() || grad_out.cols() != w.cols()) {
    throw ContractViolation("affine_backward: upstream gradient " +
                            shape_string(grad_out.shape()) + " does not match output [" +
                            std::to_string(x.rows()) + ", " + std::to_string(w.cols()) + "]");
  }
  const auto g = as_matrix(grad_out);
  as_matrix(grad_w).noalias() += as_matrix(x).transpose() * g;
  Eigen::Map<Eigen::RowVectorXd> gb(grad_b.data().data(), static_cast<Eigen::Index>(grad_b.size()));
  gb += g.colwise().sum();
  if (grad_x != nullptr) {
    *grad_x = Tensor({x.rows(), x.cols()});
    as_matrix(*grad_x).noalias() = g * as_matrix(w).transpose();
  }
}

Tensor activate(Activation kind, const Tensor& x) {
  Tensor y = x;
  for (double& v : y.data()) {
    switch (kind) {
      case Activation::Sigmoid: v = sigmoid(v); break;
      case Activation::Tanh: v = std::tanh(v); break;
      case Activation::Softplus: v = softplus(v); break;
      case Activation::LogSigmoid: v = log_sigmoid(v); break;
      case Activation::Logit: v = logit(v); break;
    }
  }
  return y;
}

Tensor activation_vjp(Activation kind, const Tensor& x, const Tensor& grad_out) {
  require_same_shape(x, grad_out, "activation_vjp");
  Tensor g = grad_out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double v = x[i];
    double d = 0.0;
    switch (kind) {
      case Activation::Sigmoid: {
        const double s = sigmoid(v);
        d = s * (1.0 - s);
        break;
      }
      case Activation::Tanh: {
        const double t = std::tanh(v);
        d = 1.0 - t * t;
        break;
      }
      case Activation::Softplus: d = sigmoid(v); break;
      case Activation::LogSigmoid: d = sigmoid(-v); break;
      case Activation::Logit:
        if (!(v > 0.0 && v < 1.0)) throw DomainError("logit vjp: argument outside (0, 1)");
        d = 1.0 / (v * (1.0 - v));
        break;
    }
    g[i] *= d;
  }
  return g;
}

Tensor sample(RngStream& stream, SampleKind kind, Tensor::Shape shape) {
  Tensor out(std::move(shape));
  for (double& v : out.data()) {
    switch (kind) {
      case SampleKind::Uniform01: v = stream.uniform01(); break;
      case SampleKind::StdNormal: v = stream.std_normal(); break;
      case SampleKind::StdLogistic: v = stream.std_logistic(); break;
    }
  }
  return out;
}

Tensor finite_diff_grad(const std::function<double(const Tensor&)>& f, const Tensor& x,
                        double h) {
  Tensor grad = Tensor::zeros_like(x);
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw OracleError("finite_diff_grad: non-finite value at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

AdamState AdamState::for_param(const Tensor& param, double lr) {
  AdamState s;
  s.m = Tensor::zeros_like(param);
  s.v = Tensor::zeros_like(param);
  s.lr = lr;
  return s;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& state) {
  require_same_shape(param, grad, "adam_step");
  if (state.m.shape() != param.shape()) state.m = Tensor::zeros_like(param);
  if (state.v.shape() != param.shape()) state.v = Tensor::zeros_like(param);
  if (!grad.all_finite()) throw TrainingAborted("non-finite gradient", state.t + 1);

  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  auto m = state.m.data();
  auto v = state.v.data();
  auto p = param.data();
  auto g = grad.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
    v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace vcae
