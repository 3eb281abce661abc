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

#include "vcae/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>

#include "vcae/container.hpp"
#include "vcae/errors.hpp"
#include "vcae/nets.hpp"
#include "vcae/rng.hpp"

namespace vcae::harness {

using models::BoundEstimate;
using models::Model;
using models::Variant;

namespace {

// Stream salts keep evaluation, validation and probe noise apart from training noise.
constexpr std::uint64_t kValidSalt = 0x56414c4944ULL;
constexpr std::uint64_t kEvalSalt = 0x4956414555ULL;
constexpr std::uint64_t kProbeSalt = 0x50524f4245ULL;
constexpr std::uint64_t kNvilSalt = 0x4e56494cULL;
constexpr const char* kBaselinePrefix = "baseline/";

bool needs_nvil(Variant v) { return v == Variant::VcaeDiscrete || v == Variant::Nvil; }

est::NvilState make_nvil(const ExperimentConfig& c) {
  est::NvilConfig nc;
  nc.hidden_units = c.nvil_hidden_units;
  nc.decay = c.nvil_decay;
  nc.learning_rate = c.learning_rate;
  return est::NvilState(c.model.input_dim(), c.seed_init ^ kNvilSalt, nc);
}

const data::Dataset& pick(const data::MnistSplits& s, data::Split split) {
  switch (split) {
    case data::Split::Train: return s.train;
    case data::Split::Valid: return s.valid;
    case data::Split::Test: return s.test;
  }
  return s.test;
}

data::Dataset train_set(const ExperimentConfig& c, const data::MnistSplits& s) {
  return c.train_subset ? data::head(s.train, *c.train_subset) : s.train;
}

models::Batch rows_batch(const ExperimentConfig& c, const data::Dataset& d, std::size_t begin,
                         std::size_t end) {
  std::vector<std::size_t> idx(end - begin);
  std::iota(idx.begin(), idx.end(), begin);
  return models::task_adapt(c.model.task, gather_rows(d.images, idx));
}

void save(const Model& model, const std::optional<est::NvilState>& nvil, std::uint64_t step,
          const ExperimentConfig& c, const std::filesystem::path& path) {
  nets::ParamStore all = model.params();
  nlohmann::json meta{{"step", step}, {"config", to_json(c)}};
  if (nvil) {
    for (const auto& p : nvil->params()) {
      const auto i = all.add(p.name, p.value);
      all[i].adam = p.adam;
    }
    meta["nvil_c"] = nvil->c;
    meta["nvil_v"] = nvil->v;
  }
  nets::checkpoint_save(all, path, meta.dump());
}

void check_finite_grads(const nets::ParamStore& store, std::uint64_t step) {
  for (const auto& p : store) {
    if (!p.grad.all_finite()) {
      throw TrainingAborted("non-finite gradient in '" + p.name + "'", step);
    }
  }
}

struct Window {
  double weight = 0.0;
  BoundEstimate sum;

  void add(const BoundEstimate& e, double rows) {
    weight += rows;
    sum.total += rows * e.total;
    sum.term_recon += rows * e.term_recon;
    sum.term_kl_s += rows * e.term_kl_s;
    sum.term_kl_z += rows * e.term_kl_z;
  }
  BoundEstimate mean() const {
    BoundEstimate m;
    if (weight == 0.0) return m;
    m.total = sum.total / weight;
    m.term_recon = sum.term_recon / weight;
    m.term_kl_s = sum.term_kl_s / weight;
    m.term_kl_z = sum.term_kl_z / weight;
    return m;
  }
};

MetricsRecord bound_record(std::uint64_t step, const std::string& split, const BoundEstimate& e) {
  MetricsRecord r;
  r.step = step;
  r.split = split;
  r.bound = e.total;
  r.recon = e.term_recon;
  r.kl_s = e.term_kl_s;
  r.kl_z = e.term_kl_z;
  return r;
}

BoundEstimate mean_bound(const Model& model, const ExperimentConfig& c, const data::Dataset& d,
                         const RngStream& rng) {
  Window w;
  std::size_t b = 0;
  for (std::size_t begin = 0; begin < d.count(); begin += c.batch_size, ++b) {
    const std::size_t end = std::min(d.count(), begin + c.batch_size);
    RngStream r = rng.split(b);
    w.add(models::bound(model, rows_batch(c, d, begin, end), r), static_cast<double>(end - begin));
  }
  return w.mean();
}

}  // namespace

data::Dataset synthetic_dataset(std::size_t count, std::size_t dim, std::uint64_t seed,
                                data::Split split) {
  constexpr std::size_t kPrototypes = 4;
  constexpr double kFlip = 0.1;
  RngStream proto_rng = RngStream(seed).split(99);
  Tensor protos({kPrototypes, dim});
  for (std::size_t i = 0; i < protos.size(); ++i) protos[i] = proto_rng.uniform01() < 0.5 ? 1.0 : 0.0;

  RngStream rng = RngStream(seed).split(static_cast<std::uint64_t>(split));
  Tensor images({count, dim});
  for (std::size_t r = 0; r < count; ++r) {
    const auto k = static_cast<std::size_t>(rng.next_u64() % kPrototypes);
    for (std::size_t j = 0; j < dim; ++j) {
      const double bit = protos(k, j);
      images(r, j) = rng.uniform01() < kFlip ? 1.0 - bit : bit;
    }
  }
  return {std::move(images), split, data::Binarization{}};
}

data::MnistSplits load_datasets(const ExperimentConfig& c) {
  if (c.dataset == DatasetKind::Synthetic) {
    const std::size_t held_out = std::max<std::size_t>(1, c.synthetic_count / 5);
    return {synthetic_dataset(c.synthetic_count, c.model.x_dim, c.seed_data, data::Split::Train),
            synthetic_dataset(held_out, c.model.x_dim, c.seed_data, data::Split::Valid),
            synthetic_dataset(held_out, c.model.x_dim, c.seed_data, data::Split::Test)};
  }
  std::optional<std::filesystem::path> cache;
  if (c.cache_dir) cache = *c.cache_dir;
  return data::load_mnist(c.data_dir, c.binarization, cache);
}

std::filesystem::path metrics_path(const ExperimentConfig& c) {
  return std::filesystem::path(c.output_dir) / "metrics.csv";
}
std::filesystem::path checkpoint_path(const ExperimentConfig& c) {
  return std::filesystem::path(c.output_dir) / "checkpoint.vcaepak";
}
std::filesystem::path last_good_path(const ExperimentConfig& c) {
  return std::filesystem::path(c.output_dir) / "checkpoint-last-good.vcaepak";
}

std::uint64_t planned_steps(const ExperimentConfig& c, std::size_t train_count) {
  if (!c.epochs) return c.max_steps;
  const std::uint64_t per_epoch = (train_count + c.batch_size - 1) / c.batch_size;
  return *c.epochs * per_epoch;
}

TrainResult run_training(const ExperimentConfig& c, std::ostream* log) {
  const auto splits = load_datasets(c);
  const data::Dataset train = train_set(c, splits);
  const data::Dataset valid = c.eval_subset ? data::head(splits.valid, *c.eval_subset) : splits.valid;
  if (train.count() == 0) throw ContractViolation("training set is empty");

  Model model(c.model, c.seed_init);
  model.params().set_learning_rate(c.learning_rate);
  std::optional<est::NvilState> nvil;
  if (needs_nvil(c.model.variant)) nvil.emplace(make_nvil(c));

  std::filesystem::create_directories(c.output_dir);
  std::filesystem::remove(metrics_path(c));
  MetricsWriter metrics(metrics_path(c), to_json(c).dump());

  const std::uint64_t steps = planned_steps(c, train.count());
  const models::Batch probe_batch = rows_batch(c, train, 0, std::min(train.count(), c.batch_size));
  const auto t0 = std::chrono::steady_clock::now();
  auto wall = [&]() -> std::optional<double> {
    if (!c.record_wall_time) return std::nullopt;
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  };

  TrainResult result;
  Window window;
  std::uint64_t step = 0;
  for (std::uint64_t epoch = 0; step < steps; ++epoch) {
    const auto batches =
        data::minibatches(train.count(), c.batch_size, RngStream(c.seed_data).split(epoch).next_u64());
    for (const auto& idx : batches) {
      if (step >= steps) break;
      ++step;
      const auto batch = models::task_adapt(c.model.task, gather_rows(train.images, idx));
      RngStream rng = RngStream(c.seed_noise).split(step);
      model.params().zero_grad();
      BoundEstimate e;
      try {
        e = est::estimate_gradients(model, batch, rng, nvil ? &*nvil : nullptr);
        if (!std::isfinite(e.total)) throw TrainingAborted("non-finite training bound", step);
        check_finite_grads(model.params(), step);
      } catch (const TrainingAborted& err) {
        save(model, nvil, step - 1, c, last_good_path(c));
        throw TrainingAborted(std::string(err.what()) + "; last good parameters saved to " +
                                  last_good_path(c).string(),
                              step);
      }
      model.params().step();
      window.add(e, static_cast<double>(idx.size()));

      if ((c.eval_every != 0 && step % c.eval_every == 0) || step == steps) {
        result.last_train = window.mean();
        auto tr = bound_record(step, "train", result.last_train);
        tr.wall_ms = wall();
        metrics.append(tr);
        auto va = bound_record(step, "valid",
                               mean_bound(model, c, valid, RngStream(c.seed_noise ^ kValidSalt).split(step)));
        va.wall_ms = wall();
        metrics.append(va);
        if (log != nullptr) {
          *log << "step " << step << "/" << steps << "  train bound " << tr.bound.value_or(0.0)
               << "  valid bound " << va.bound.value_or(0.0) << '\n';
        }
        window = Window{};
      }
      if (c.variance_trace_every != 0 && step % c.variance_trace_every == 0) {
        const auto rep = est::variance_probe(model, probe_batch, c.variance_replicas,
                                             RngStream(c.seed_noise ^ kProbeSalt).split(step),
                                             nvil ? &*nvil : nullptr);
        MetricsRecord tr;
        tr.step = step;
        tr.split = "trace";
        tr.variance = rep.group_variance;
        tr.wall_ms = wall();
        metrics.append(tr);
      }
      if (c.checkpoint_every != 0 && step % c.checkpoint_every == 0) {
        save(model, nvil, step, c, checkpoint_path(c));
      }
    }
  }
  save(model, nvil, step, c, checkpoint_path(c));
  result.steps = step;
  result.checkpoint = checkpoint_path(c);
  result.metrics = metrics_path(c);
  return result;
}

LoadedModel load_model(const std::filesystem::path& checkpoint, const ExperimentConfig& c) {
  const auto ck = nets::checkpoint_load(checkpoint);
  LoadedModel out{Model(c.model, c.seed_init), 0, std::nullopt};
  nets::ParamStore model_part;
  nets::ParamStore nvil_part;
  for (const auto& p : ck.params) {
    auto& dst = p.name.starts_with(kBaselinePrefix) ? nvil_part : model_part;
    const auto i = dst.add(p.name, p.value);
    dst[i].adam = p.adam;
  }
  nets::restore_into(out.model.params(), model_part);
  const auto meta = nlohmann::json::parse(ck.metadata, nullptr, false);
  if (!meta.is_discarded() && meta.contains("step")) out.step = meta["step"].get<std::uint64_t>();
  if (needs_nvil(c.model.variant)) {
    out.nvil.emplace(make_nvil(c));
    nets::restore_into(out.nvil->params(), nvil_part);
    if (!meta.is_discarded()) {
      out.nvil->c = meta.value("nvil_c", 0.0);
      out.nvil->v = meta.value("nvil_v", 0.0);
    }
  } else if (nvil_part.size() != 0) {
    throw nets::CheckpointError(pack::FormatError::Kind::NameSetMismatch,
                                "checkpoint holds baseline parameters the model does not use");
  }
  return out;
}

EvalReport evaluate(const Model& model, const data::Dataset& d, std::size_t k,
                    std::size_t batch_size, std::uint64_t seed) {
  if (k == 0) throw ContractViolation("IWAE needs K >= 1");
  if (batch_size == 0) throw ContractViolation("batch size must be at least 1");
  const RngStream root(seed);
  std::vector<double> values;
  values.reserve(d.count());
  std::size_t b = 0;
  for (std::size_t begin = 0; begin < d.count(); begin += batch_size, ++b) {
    const std::size_t end = std::min(d.count(), begin + batch_size);
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    const auto batch = models::task_adapt(model.spec().task, gather_rows(d.images, idx));
    RngStream r = root.split(b);
    const Tensor v = model.spec().variant == Variant::ConcreteZ
                         ? models::concrete_z_test_eval(model, batch, k, r)
                         : models::iwae_estimate(model, batch, k, r);
    values.insert(values.end(), v.data().begin(), v.data().end());
  }
  EvalReport rep;
  rep.split = d.split;
  rep.k = k;
  rep.count = values.size();
  if (values.empty()) return rep;
  double m = 0.0;
  for (double v : values) m += v;
  m /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  rep.mean = m;
  if (values.size() > 1) {
    rep.standard_error =
        std::sqrt(ss / static_cast<double>(values.size() - 1) / static_cast<double>(values.size()));
  }
  return rep;
}

EvalReport run_eval(const std::filesystem::path& checkpoint, const ExperimentConfig& c,
                    data::Split split, std::size_t k) {
  const auto loaded = load_model(checkpoint, c);
  const auto splits = load_datasets(c);
  const data::Dataset& d = split == data::Split::Train ? train_set(c, splits) : pick(splits, split);
  EvalReport rep = evaluate(loaded.model, d, k, c.batch_size, c.seed_noise ^ kEvalSalt);
  rep.step = loaded.step;

  MetricsWriter metrics(metrics_path(c), to_json(c).dump());
  MetricsRecord r;
  r.step = rep.step;
  r.split = data::to_string(split);
  r.iwae = rep.mean;
  r.iwae_k = k;
  metrics.append(r);
  return rep;
}

est::VarianceReport trace_variance(const std::filesystem::path& checkpoint,
                                   const ExperimentConfig& c, std::size_t replicas) {
  const auto loaded = load_model(checkpoint, c);
  const auto splits = load_datasets(c);
  const auto train = train_set(c, splits);
  const auto batch = rows_batch(c, train, 0, std::min(train.count(), c.batch_size));
  auto rep = est::variance_probe(loaded.model, batch, replicas,
                                 RngStream(c.seed_noise ^ kProbeSalt).split(loaded.step),
                                 loaded.nvil ? &*loaded.nvil : nullptr);
  rep.step = loaded.step;

  MetricsWriter metrics(metrics_path(c), to_json(c).dump());
  MetricsRecord r;
  r.step = loaded.step;
  r.split = "trace";
  r.variance = rep.group_variance;
  metrics.append(r);
  return rep;
}

DataSummary inspect_data(const ExperimentConfig& c) {
  const auto s = load_datasets(c);
  DataSummary out;
  out.binarization = s.train.binarization.describe();
  out.train = s.train.count();
  out.valid = s.valid.count();
  out.test = s.test.count();
  out.pixels = s.train.images.cols();
  out.train_mean_pixel = s.train.count() == 0 ? 0.0 : mean(s.train.images);
  return out;
}

}  // namespace vcae::harness
