// Copyright 2026 the nerkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "nerkit/eval.hpp"
#include "nerkit/model_base.hpp"

namespace nerkit {

inline double global_grad_norm(const ParameterStore& params) {
  double sq = 0.0;
  for (const auto& p : params.all())
    for (double g : p->grad.values) sq += g * g;
  return std::sqrt(sq);
}

// Rescales all gradients by threshold/norm when the global L2 norm exceeds
// the threshold; direction is preserved exactly. Returns the pre-clip norm.
inline double clip_gradients(ParameterStore& params, double threshold) {
  if (threshold <= 0.0)
    throw std::invalid_argument("clip_gradients: threshold must be positive");
  double norm = global_grad_norm(params);
  if (norm > threshold) {
    double s = threshold / norm;
    for (const auto& p : params.all())
      for (double& g : p->grad.values) g *= s;
  }
  return norm;
}

// p <- p - lr * g on every coordinate, then gradients are zeroed.
inline void sgd_step(ParameterStore& params, double lr) {
  for (const auto& p : params.all()) {
    for (std::size_t i = 0; i < p->value.size(); ++i)
      p->value.values[i] -= lr * p->grad.values[i];
  }
  params.zero_grads();
}

struct TrainReport {
  struct Epoch {
    int epoch = 0;
    double mean_loss = 0.0;
    double dev_precision = 0.0;
    double dev_recall = 0.0;
    double dev_f1 = 0.0;
  };

  std::vector<Epoch> epochs;
  int best_epoch = -1;
  double best_dev_f1 = 0.0;

  // one structured record per epoch plus a final best-checkpoint line
  std::string to_lines() const {
    std::string out;
    char buf[200];
    for (const Epoch& e : epochs) {
      std::snprintf(buf, sizeof(buf),
                    "epoch=%d mean_loss=%.6f dev_precision=%.2f "
                    "dev_recall=%.2f dev_f1=%.2f\n",
                    e.epoch, e.mean_loss, e.dev_precision, e.dev_recall,
                    e.dev_f1);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf), "best_epoch=%d best_dev_f1=%.2f\n",
                  best_epoch, best_dev_f1);
    out += buf;
    return out;
  }
};

inline EvalReport evaluate_model(const Model& model,
                                 const std::vector<Example>& examples) {
  std::vector<std::vector<LabeledChunk>> pred, gold;
  pred.reserve(examples.size());
  gold.reserve(examples.size());
  for (const Example& ex : examples) {
    pred.push_back(model.predict_chunks(ex.sentence));
    gold.push_back(ex.gold_chunks);
  }
  return evaluate(pred, gold);
}

// Runs one epoch of per-example SGD in the given order; returns mean loss.
inline double train_epoch(Model& model, const std::vector<Example>& train,
                          const std::vector<std::size_t>& order, Rng& rng) {
  const RunConfig& cfg = model.config();
  double total = 0.0;
  for (std::size_t idx : order) {
    Tape tape;
    Var loss = model.example_loss(tape, train[idx], rng);
    total += tape.scalar_value(loss);
    tape.backward(loss);
    clip_gradients(model.params(), cfg.clip);
    sgd_step(model.params(), cfg.learning_rate);
  }
  return total / static_cast<double>(order.size());
}

// Shuffled per-example SGD with gradient clipping; evaluates dev F1 each
// epoch, keeps the best checkpoint, and leaves the model at the best
// parameters on return. Stops early once dev F1 reaches early_stop_f1.
inline TrainReport train(Model& model, const std::vector<Example>& train_set,
                         const std::vector<Example>& dev_set, Rng& rng) {
  if (train_set.empty())
    throw std::invalid_argument("train: empty training set");
  const RunConfig& cfg = model.config();
  TrainReport report;
  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  std::vector<Tensor> best_values;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double mean_loss = train_epoch(model, train_set, order, rng);

    TrainReport::Epoch e;
    e.epoch = epoch;
    e.mean_loss = mean_loss;
    if (!dev_set.empty()) {
      EvalReport dev = evaluate_model(model, dev_set);
      e.dev_precision = dev.overall_precision();
      e.dev_recall = dev.overall_recall();
      e.dev_f1 = dev.overall_f1();
    }
    report.epochs.push_back(e);

    if (report.best_epoch < 0 || e.dev_f1 > report.best_dev_f1) {
      report.best_epoch = epoch;
      report.best_dev_f1 = e.dev_f1;
      best_values.clear();
      for (const auto& p : model.params().all())
        best_values.push_back(p->value);
    }
    if (cfg.early_stop_f1 >= 0.0 && e.dev_f1 >= cfg.early_stop_f1) break;
  }

  if (!best_values.empty()) {
    std::size_t i = 0;
    for (const auto& p : model.params().all()) p->value = best_values[i++];
  }
  return report;
}

}  // namespace nerkit
