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
#include <stdexcept>
#include <string>
#include <vector>

#include "nerkit/rng.hpp"
#include "nerkit/tape.hpp"

namespace nerkit {

inline Tensor uniform_init(std::vector<int> shape, int fan_in, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  double bound = std::sqrt(3.0 / fan_in);
  for (double& v : t.values) v = rng.uniform(-bound, bound);
  return t;
}

// LSTM cell with a coupled input/forget gate: the forget weight is 1 - i_t,
// there is no separate forget gate. Cell-state peepholes default to
// elementwise vectors; full_peephole switches them to square matrices.
struct LSTMCell {
  int input_dim = 0;
  int hidden_dim = 0;
  bool full_peephole = false;

  Parameter* W_xi = nullptr;
  Parameter* W_hi = nullptr;
  Parameter* p_ci = nullptr;
  Parameter* b_i = nullptr;
  Parameter* W_xc = nullptr;
  Parameter* W_hc = nullptr;
  Parameter* b_c = nullptr;
  Parameter* W_xo = nullptr;
  Parameter* W_ho = nullptr;
  Parameter* p_co = nullptr;
  Parameter* b_o = nullptr;

  static LSTMCell create(ParameterStore& ps, const std::string& prefix,
                         int input_dim, int hidden_dim, Rng& rng,
                         bool full_peephole = false) {
    LSTMCell c;
    c.input_dim = input_dim;
    c.hidden_dim = hidden_dim;
    c.full_peephole = full_peephole;
    auto mat = [&](const char* name, int r, int k) {
      return &ps.add(prefix + "/" + name, uniform_init({r, k}, k, rng));
    };
    auto peep = [&](const char* name) {
      if (full_peephole)
        return &ps.add(prefix + "/" + name,
                       uniform_init({hidden_dim, hidden_dim}, hidden_dim, rng));
      return &ps.add(prefix + "/" + name,
                     uniform_init({hidden_dim}, hidden_dim, rng));
    };
    auto bias = [&](const char* name) {
      return &ps.add(prefix + "/" + name, Tensor::zeros({hidden_dim}));
    };
    c.W_xi = mat("W_xi", hidden_dim, input_dim);
    c.W_hi = mat("W_hi", hidden_dim, hidden_dim);
    c.p_ci = peep("W_ci");
    c.b_i = bias("b_i");
    c.W_xc = mat("W_xc", hidden_dim, input_dim);
    c.W_hc = mat("W_hc", hidden_dim, hidden_dim);
    c.b_c = bias("b_c");
    c.W_xo = mat("W_xo", hidden_dim, input_dim);
    c.W_ho = mat("W_ho", hidden_dim, hidden_dim);
    c.p_co = peep("W_co");
    c.b_o = bias("b_o");
    return c;
  }
};

struct LSTMState {
  Var h;
  Var c;
};

inline LSTMState lstm_initial_state(Tape& t, int hidden_dim) {
  return {t.zeros_const({hidden_dim}), t.zeros_const({hidden_dim})};
}

inline Var apply_peephole(Tape& t, const LSTMCell& cell, Parameter& p,
                          Var cell_state) {
  if (cell.full_peephole) return t.matvec(t.param(p), cell_state);
  return t.hadamard(t.param(p), cell_state);
}

inline LSTMState lstm_step(Tape& t, const LSTMCell& cell, Var x,
                           const LSTMState& prev) {
  if (t.value(x).rank() != 1 || t.value(x).rows() != cell.input_dim)
    throw std::invalid_argument("lstm_step: input dim mismatch");
  Var pre_i = t.add(t.add(t.matvec(t.param(*cell.W_xi), x),
                          t.matvec(t.param(*cell.W_hi), prev.h)),
                    t.add(apply_peephole(t, cell, *cell.p_ci, prev.c),
                          t.param(*cell.b_i)));
  Var i = t.sigmoid(pre_i);
  Var cand = t.tanh(t.add(t.add(t.matvec(t.param(*cell.W_xc), x),
                                t.matvec(t.param(*cell.W_hc), prev.h)),
                          t.param(*cell.b_c)));
  Var ones = t.constant(Tensor({cell.hidden_dim},
                               std::vector<double>(cell.hidden_dim, 1.0)));
  Var c = t.add(t.hadamard(t.sub(ones, i), prev.c), t.hadamard(i, cand));
  Var pre_o = t.add(t.add(t.matvec(t.param(*cell.W_xo), x),
                          t.matvec(t.param(*cell.W_ho), prev.h)),
                    t.add(apply_peephole(t, cell, *cell.p_co, c),
                          t.param(*cell.b_o)));
  Var o = t.sigmoid(pre_o);
  Var h = t.hadamard(o, t.tanh(c));
  return {h, c};
}

// Stacked unidirectional LSTM; layer l feeds its hidden state to layer l+1.
struct LSTM {
  std::vector<LSTMCell> layers;

  static LSTM create(ParameterStore& ps, const std::string& prefix,
                     int input_dim, int hidden_dim, int num_layers, Rng& rng,
                     bool full_peephole = false) {
    LSTM l;
    for (int i = 0; i < num_layers; ++i)
      l.layers.push_back(LSTMCell::create(
          ps, prefix + "/layer" + std::to_string(i),
          i == 0 ? input_dim : hidden_dim, hidden_dim, rng, full_peephole));
    return l;
  }

  int hidden_dim() const { return layers.back().hidden_dim; }

  std::vector<LSTMState> initial_states(Tape& t) const {
    std::vector<LSTMState> s;
    s.reserve(layers.size());
    for (const LSTMCell& c : layers)
      s.push_back(lstm_initial_state(t, c.hidden_dim));
    return s;
  }

  std::vector<LSTMState> step(Tape& t, Var x,
                              const std::vector<LSTMState>& prev) const {
    std::vector<LSTMState> next;
    next.reserve(layers.size());
    Var in = x;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      next.push_back(lstm_step(t, layers[l], in, prev[l]));
      in = next.back().h;
    }
    return next;
  }
};

// Forward and backward cells with disjoint parameter sets.
struct BiLSTM {
  LSTMCell forward;
  LSTMCell backward;

  static BiLSTM create(ParameterStore& ps, const std::string& prefix,
                       int input_dim, int hidden_dim, Rng& rng,
                       bool full_peephole = false) {
    BiLSTM b;
    b.forward = LSTMCell::create(ps, prefix + "/fwd", input_dim, hidden_dim,
                                 rng, full_peephole);
    b.backward = LSTMCell::create(ps, prefix + "/bwd", input_dim, hidden_dim,
                                  rng, full_peephole);
    return b;
  }

  int output_dim() const { return forward.hidden_dim + backward.hidden_dim; }
};

// Position t carries [forward state after x_1..x_t ; backward state after
// x_n..x_t].
inline std::vector<Var> bilstm_encode(Tape& t, const BiLSTM& bi,
                                      const std::vector<Var>& xs) {
  if (xs.empty())
    throw std::domain_error("bilstm_encode: empty input sequence");
  std::size_t n = xs.size();
  std::vector<Var> fwd(n), bwd(n);
  LSTMState s = lstm_initial_state(t, bi.forward.hidden_dim);
  for (std::size_t i = 0; i < n; ++i) {
    s = lstm_step(t, bi.forward, xs[i], s);
    fwd[i] = s.h;
  }
  s = lstm_initial_state(t, bi.backward.hidden_dim);
  for (std::size_t i = n; i-- > 0;) {
    s = lstm_step(t, bi.backward, xs[i], s);
    bwd[i] = s.h;
  }
  std::vector<Var> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = t.concat(fwd[i], bwd[i]);
  return out;
}

// Final states of a forward and a backward pass, concatenated (used for
// word-from-characters and chunk composition).
inline Var bilstm_final_concat(Tape& t, const BiLSTM& bi,
                               const std::vector<Var>& xs) {
  if (xs.empty())
    throw std::domain_error("bilstm_final_concat: empty input sequence");
  LSTMState f = lstm_initial_state(t, bi.forward.hidden_dim);
  for (std::size_t i = 0; i < xs.size(); ++i)
    f = lstm_step(t, bi.forward, xs[i], f);
  LSTMState b = lstm_initial_state(t, bi.backward.hidden_dim);
  for (std::size_t i = xs.size(); i-- > 0;)
    b = lstm_step(t, bi.backward, xs[i], b);
  return t.concat(f.h, b.h);
}

}  // namespace nerkit
