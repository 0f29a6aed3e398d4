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

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nerkit/tensor.hpp"

namespace nerkit {

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// A named trainable tensor with its accumulated gradient. Gradients add up
// across every use within one example and are cleared by the optimizer step.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)) {
    grad = Tensor::zeros(value.shape);
  }
};

// Registry of trainable tensors. Insertion order is the canonical parameter
// order for optimizer sweeps and serialization.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor init) {
    if (by_name_.count(name))
      throw std::logic_error("duplicate parameter name: " + name);
    params_.push_back(std::make_unique<Parameter>(name, std::move(init)));
    by_name_[params_.back()->name] = params_.back().get();
    return *params_.back();
  }

  Parameter* find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : it->second;
  }

  const std::vector<std::unique_ptr<Parameter>>& all() const {
    return params_;
  }

  std::size_t value_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
  }

  void zero_grads() {
    for (auto& p : params_)
      std::fill(p->grad.values.begin(), p->grad.values.end(), 0.0);
  }

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::unordered_map<std::string, Parameter*> by_name_;
};

// Reverse-mode tape. Every op appends a node holding the forward value and a
// closure that routes the node's gradient to its inputs; backward() replays
// the nodes in reverse. One tape per training example, single-threaded.
class Tape {
 public:
  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  // ---- leaves ----

  Var constant(Tensor value) { return push(std::move(value)); }

  Var scalar_const(double x) { return constant(Tensor::scalar(x)); }

  Var zeros_const(std::vector<int> shape) {
    return constant(Tensor::zeros(std::move(shape)));
  }

  // Leaf bound to a trainable parameter; backward adds into p.grad.
  Var param(Parameter& p) {
    Var v = push(p.value);
    Parameter* pp = &p;
    node(v).backprop = [pp](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      for (std::size_t i = 0; i < g.size(); ++i) pp->grad.values[i] += g[i];
    };
    return v;
  }

  // Single row of a rank-2 parameter (embedding lookup); backward touches
  // only that row of the gradient.
  Var param_row(Parameter& p, int r) {
    if (p.value.rank() != 2)
      throw std::invalid_argument("param_row: parameter is not a matrix");
    if (r < 0 || r >= p.value.rows())
      throw std::invalid_argument("param_row: row out of range in " + p.name);
    int c = p.value.cols();
    Tensor out = Tensor::zeros({c});
    for (int j = 0; j < c; ++j) out.at(j) = p.value.at(r, j);
    Var v = push(std::move(out));
    Parameter* pp = &p;
    node(v).backprop = [pp, r, c](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      for (int j = 0; j < c; ++j) pp->grad.at(r, j) += g[static_cast<std::size_t>(j)];
    };
    return v;
  }

  // ---- elementwise ----

  Var add(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    require_same_shape(x, y, "add");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += y.values[i];
    Var v = push(std::move(out));
    node(v).backprop = [a, b](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      t.accumulate(a, g, +1.0);
      t.accumulate(b, g, +1.0);
    };
    return v;
  }

  Var sub(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    require_same_shape(x, y, "sub");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] -= y.values[i];
    Var v = push(std::move(out));
    node(v).backprop = [a, b](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      t.accumulate(a, g, +1.0);
      t.accumulate(b, g, -1.0);
    };
    return v;
  }

  Var hadamard(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    require_same_shape(x, y, "hadamard");
    Tensor out = x;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] *= y.values[i];
    Var v = push(std::move(out));
    node(v).backprop = [a, b](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      const std::vector<double>& xv = t.value(a).values;
      const std::vector<double>& yv = t.value(b).values;
      std::vector<double>& ga = t.node(a).grad;
      std::vector<double>& gb = t.node(b).grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * yv[i];
        gb[i] += g[i] * xv[i];
      }
    };
    return v;
  }

  Var scale(Var a, double c) {
    Tensor out = value(a);
    for (double& x : out.values) x *= c;
    Var v = push(std::move(out));
    node(v).backprop = [a, c](Tape& t, int id) {
      t.accumulate(a, t.node_at(id).grad, c);
    };
    return v;
  }

  Var sigmoid(Var a) {
    Tensor out = value(a);
    for (double& x : out.values) x = stable_sigmoid(x);
    Var v = push(std::move(out));
    node(v).backprop = [a](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      const std::vector<double>& y = t.node_at(id).value.values;
      std::vector<double>& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += g[i] * y[i] * (1.0 - y[i]);
    };
    return v;
  }

  Var tanh(Var a) {
    Tensor out = value(a);
    for (double& x : out.values) x = std::tanh(x);
    Var v = push(std::move(out));
    node(v).backprop = [a](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      const std::vector<double>& y = t.node_at(id).value.values;
      std::vector<double>& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        ga[i] += g[i] * (1.0 - y[i] * y[i]);
    };
    return v;
  }

  Var relu(Var a) {
    Tensor out = value(a);
    for (double& x : out.values) x = x > 0.0 ? x : 0.0;
    Var v = push(std::move(out));
    node(v).backprop = [a](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      const std::vector<double>& x = t.value(a).values;
      std::vector<double>& ga = t.node(a).grad;
      for (std::size_t i = 0; i < g.size(); ++i)
        if (x[i] > 0.0) ga[i] += g[i];
    };
    return v;
  }

  // ---- linear algebra ----

  Var matvec(Var m, Var x) {
    const Tensor& mv = value(m);
    const Tensor& xv = value(x);
    if (mv.rank() != 2 || xv.rank() != 1 || mv.cols() != xv.rows())
      throw std::invalid_argument("matvec: shape mismatch " + mv.shape_str() +
                                  " * " + xv.shape_str());
    int r = mv.rows(), c = mv.cols();
    Tensor out = Tensor::zeros({r});
    for (int i = 0; i < r; ++i) {
      double s = 0.0;
      for (int j = 0; j < c; ++j) s += mv.at(i, j) * xv.at(j);
      out.at(i) = s;
    }
    Var v = push(std::move(out));
    node(v).backprop = [m, x, r, c](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      const std::vector<double>& mvals = t.value(m).values;
      const std::vector<double>& xvals = t.value(x).values;
      std::vector<double>& gm = t.node(m).grad;
      std::vector<double>& gx = t.node(x).grad;
      for (int i = 0; i < r; ++i) {
        double gi = g[static_cast<std::size_t>(i)];
        if (gi == 0.0) continue;
        std::size_t base = static_cast<std::size_t>(i) * c;
        for (int j = 0; j < c; ++j) {
          gm[base + j] += gi * xvals[static_cast<std::size_t>(j)];
          gx[static_cast<std::size_t>(j)] += gi * mvals[base + j];
        }
      }
    };
    return v;
  }

  // ---- structural ----

  Var concat(Var a, Var b) {
    const Tensor& x = value(a);
    const Tensor& y = value(b);
    if (x.rank() != 1 || y.rank() != 1)
      throw std::invalid_argument("concat: rank-1 operands required");
    Tensor out = Tensor::zeros({x.rows() + y.rows()});
    std::copy(x.values.begin(), x.values.end(), out.values.begin());
    std::copy(y.values.begin(), y.values.end(), out.values.begin() + x.rows());
    int na = x.rows();
    Var v = push(std::move(out));
    node(v).backprop = [a, b, na](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      std::vector<double>& ga = t.node(a).grad;
      std::vector<double>& gb = t.node(b).grad;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
      for (std::size_t i = 0; i < gb.size(); ++i)
        gb[i] += g[static_cast<std::size_t>(na) + i];
    };
    return v;
  }

  Var concat(const std::vector<Var>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat: empty list");
    Var acc = parts[0];
    for (std::size_t i = 1; i < parts.size(); ++i) acc = concat(acc, parts[i]);
    return acc;
  }

  // vector from scalar nodes
  Var stack(const std::vector<Var>& xs) {
    if (xs.empty()) throw std::invalid_argument("stack: empty list");
    Tensor out = Tensor::zeros({static_cast<int>(xs.size())});
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Tensor& x = value(xs[i]);
      if (x.size() != 1)
        throw std::invalid_argument("stack: operands must be scalars");
      out.values[i] = x.values[0];
    }
    Var v = push(std::move(out));
    std::vector<Var> in = xs;
    node(v).backprop = [in](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      for (std::size_t i = 0; i < in.size(); ++i)
        t.node(in[i]).grad[0] += g[i];
    };
    return v;
  }

  Var pick(Var a, int i) {
    const Tensor& x = value(a);
    if (x.rank() != 1) throw std::invalid_argument("pick: rank-1 required");
    if (i < 0 || i >= x.rows())
      throw std::domain_error("pick: index out of range");
    Var v = push(Tensor::scalar(x.at(i)));
    node(v).backprop = [a, i](Tape& t, int id) {
      t.node(a).grad[static_cast<std::size_t>(i)] += t.node_at(id).grad[0];
    };
    return v;
  }

  Var gather(Var a, const std::vector<int>& idx) {
    const Tensor& x = value(a);
    if (x.rank() != 1) throw std::invalid_argument("gather: rank-1 required");
    if (idx.empty()) throw std::invalid_argument("gather: empty index list");
    Tensor out = Tensor::zeros({static_cast<int>(idx.size())});
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= x.rows())
        throw std::domain_error("gather: index out of range");
      out.values[k] = x.at(idx[k]);
    }
    Var v = push(std::move(out));
    std::vector<int> ix = idx;
    node(v).backprop = [a, ix](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      std::vector<double>& ga = t.node(a).grad;
      for (std::size_t k = 0; k < ix.size(); ++k)
        ga[static_cast<std::size_t>(ix[k])] += g[k];
    };
    return v;
  }

  Var slice(Var a, int begin, int len) {
    const Tensor& x = value(a);
    if (x.rank() != 1) throw std::invalid_argument("slice: rank-1 required");
    if (begin < 0 || len <= 0 || begin + len > x.rows())
      throw std::domain_error("slice: range out of bounds");
    Tensor out = Tensor::zeros({len});
    for (int k = 0; k < len; ++k) out.at(k) = x.at(begin + k);
    Var v = push(std::move(out));
    node(v).backprop = [a, begin, len](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      std::vector<double>& ga = t.node(a).grad;
      for (int k = 0; k < len; ++k)
        ga[static_cast<std::size_t>(begin + k)] +=
            g[static_cast<std::size_t>(k)];
    };
    return v;
  }

  Var row(Var m, int i) {
    const Tensor& mv = value(m);
    if (mv.rank() != 2) throw std::invalid_argument("row: rank-2 required");
    if (i < 0 || i >= mv.rows())
      throw std::domain_error("row: index out of range");
    int c = mv.cols();
    Tensor out = Tensor::zeros({c});
    for (int j = 0; j < c; ++j) out.at(j) = mv.at(i, j);
    Var v = push(std::move(out));
    node(v).backprop = [m, i, c](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      std::vector<double>& gm = t.node(m).grad;
      std::size_t base = static_cast<std::size_t>(i) * c;
      for (int j = 0; j < c; ++j)
        gm[base + j] += g[static_cast<std::size_t>(j)];
    };
    return v;
  }

  Var column(Var m, int j) {
    const Tensor& mv = value(m);
    if (mv.rank() != 2) throw std::invalid_argument("column: rank-2 required");
    if (j < 0 || j >= mv.cols())
      throw std::domain_error("column: index out of range");
    int r = mv.rows(), c = mv.cols();
    Tensor out = Tensor::zeros({r});
    for (int i = 0; i < r; ++i) out.at(i) = mv.at(i, j);
    Var v = push(std::move(out));
    node(v).backprop = [m, j, r, c](Tape& t, int id) {
      const std::vector<double>& g = t.node_at(id).grad;
      std::vector<double>& gm = t.node(m).grad;
      for (int i = 0; i < r; ++i)
        gm[static_cast<std::size_t>(i) * c + j] +=
            g[static_cast<std::size_t>(i)];
    };
    return v;
  }

  Var element(Var m, int i, int j) {
    const Tensor& mv = value(m);
    if (mv.rank() != 2) throw std::invalid_argument("element: rank-2 required");
    if (i < 0 || i >= mv.rows() || j < 0 || j >= mv.cols())
      throw std::domain_error("element: index out of range");
    int c = mv.cols();
    Var v = push(Tensor::scalar(mv.at(i, j)));
    node(v).backprop = [m, i, j, c](Tape& t, int id) {
      t.node(m).grad[static_cast<std::size_t>(i) * c + j] +=
          t.node_at(id).grad[0];
    };
    return v;
  }

  // ---- reductions ----

  Var sum(Var a) {
    const Tensor& x = value(a);
    double s = 0.0;
    for (double v : x.values) s += v;
    Var v = push(Tensor::scalar(s));
    node(v).backprop = [a](Tape& t, int id) {
      double g = t.node_at(id).grad[0];
      std::vector<double>& ga = t.node(a).grad;
      for (double& x : ga) x += g;
    };
    return v;
  }

  // log sum exp, max-shifted so it cannot overflow for |x| <= 700
  Var logsumexp(Var a) {
    const Tensor& x = value(a);
    if (x.rank() != 1 || x.rows() < 1)
      throw std::domain_error("logsumexp: non-empty rank-1 input required");
    double m = x.values[0];
    for (double v : x.values) m = std::max(m, v);
    double s = 0.0;
    for (double v : x.values) s += std::exp(v - m);
    Var v = push(Tensor::scalar(m + std::log(s)));
    node(v).backprop = [a](Tape& t, int id) {
      double g = t.node_at(id).grad[0];
      double y = t.node_at(id).value.values[0];
      const std::vector<double>& x = t.value(a).values;
      std::vector<double>& ga = t.node(a).grad;
      for (std::size_t i = 0; i < x.size(); ++i)
        ga[i] += g * std::exp(x[i] - y);
    };
    return v;
  }

  // ---- access ----

  const Tensor& value(Var v) const {
    check_var(v);
    return nodes_[static_cast<std::size_t>(v.id)].value;
  }

  double scalar_value(Var v) const {
    const Tensor& t = value(v);
    if (t.size() != 1) throw std::logic_error("scalar_value: not a scalar");
    return t.values[0];
  }

  const std::vector<double>& grad(Var v) const {
    check_var(v);
    return nodes_[static_cast<std::size_t>(v.id)].grad;
  }

  std::size_t node_count() const { return nodes_.size(); }

  // Replays the tape in reverse from `loss`, accumulating exact chain-rule
  // gradients into every node and every bound Parameter.
  void backward(Var loss) {
    check_var(loss);
    if (value(loss).size() != 1)
      throw std::logic_error("backward: loss must be a recorded scalar node");
    for (auto& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
    nodes_[static_cast<std::size_t>(loss.id)].grad[0] = 1.0;
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[static_cast<std::size_t>(id)];
      if (n.backprop) n.backprop(*this, id);
    }
  }

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::function<void(Tape&, int)> backprop;  // empty for constants
  };

  Node& node(Var v) { return nodes_[static_cast<std::size_t>(v.id)]; }
  Node& node_at(int id) { return nodes_[static_cast<std::size_t>(id)]; }

  void accumulate(Var target, const std::vector<double>& g, double factor) {
    std::vector<double>& gt = node(target).grad;
    for (std::size_t i = 0; i < g.size(); ++i) gt[i] += factor * g[i];
  }

  Var push(Tensor value) {
    Node n;
    n.grad.assign(value.size(), 0.0);
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  void check_var(Var v) const {
    if (v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
      throw std::logic_error("tape: variable not on this tape");
  }

  static void require_same_shape(const Tensor& a, const Tensor& b,
                                 const char* op) {
    if (!a.same_shape(b))
      throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                  a.shape_str() + " vs " + b.shape_str());
  }

  std::vector<Node> nodes_;
};

using Var = Tape::Var;

}  // namespace nerkit
