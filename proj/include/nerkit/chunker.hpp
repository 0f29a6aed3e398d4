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
#include <limits>
#include <string>
#include <vector>

#include "nerkit/model_base.hpp"
#include "nerkit/wordrep.hpp"

namespace nerkit {

// Transition inventory: SHIFT moves the next buffer word to the stack, OUT
// moves it straight to the output, REDUCE(y) pops the whole stack as one
// chunk labeled y.
struct Action {
  enum class Kind { Shift, Out, Reduce };
  Kind kind = Kind::Shift;
  std::string label;  // entity label for Reduce, empty otherwise

  static Action shift() { return {Kind::Shift, ""}; }
  static Action out() { return {Kind::Out, ""}; }
  static Action reduce(std::string l) { return {Kind::Reduce, std::move(l)}; }

  bool operator==(const Action& o) const {
    return kind == o.kind && label == o.label;
  }

  std::string name() const {
    switch (kind) {
      case Kind::Shift:
        return "SHIFT";
      case Kind::Out:
        return "OUT";
      case Kind::Reduce:
        return "REDUCE(" + label + ")";
    }
    return "?";
  }
};

// Fixed action ordering: SHIFT, OUT, then REDUCE over alphabetically sorted
// labels. Argmax ties break by this order.
struct ActionInventory {
  std::vector<std::string> labels;

  explicit ActionInventory(std::vector<std::string> entity_labels = {})
      : labels(std::move(entity_labels)) {
    std::sort(labels.begin(), labels.end());
  }

  int size() const { return 2 + static_cast<int>(labels.size()); }

  Action action(int idx) const {
    if (idx == 0) return Action::shift();
    if (idx == 1) return Action::out();
    if (idx < 2 || idx >= size())
      throw std::domain_error("action index out of range");
    return Action::reduce(labels[static_cast<std::size_t>(idx) - 2]);
  }

  int index(const Action& a) const {
    if (a.kind == Action::Kind::Shift) return 0;
    if (a.kind == Action::Kind::Out) return 1;
    auto it = std::lower_bound(labels.begin(), labels.end(), a.label);
    if (it == labels.end() || *it != a.label)
      throw std::domain_error("unknown entity label: " + a.label);
    return 2 + static_cast<int>(it - labels.begin());
  }
};

// Reference action sequence for a gold chunking: OUT outside chunks, SHIFT
// through a chunk then REDUCE with its label. Replaying it reproduces the
// chunks exactly in at most 2n actions.
inline std::vector<Action> oracle_actions(
    std::size_t n, const std::vector<LabeledChunk>& chunks) {
  int prev_end = -1;
  for (std::size_t c = 0; c < chunks.size(); ++c) {
    const LabeledChunk& ch = chunks[c];
    if (ch.start < 0 || ch.end < ch.start || ch.end >= static_cast<int>(n))
      throw ValidationError(c, "chunk out of range");
    if (ch.start <= prev_end)
      throw ValidationError(c, "chunks overlap or are unsorted");
    prev_end = ch.end;
  }
  std::vector<Action> actions;
  int pos = 0;
  for (const LabeledChunk& ch : chunks) {
    for (; pos < ch.start; ++pos) actions.push_back(Action::out());
    for (; pos <= ch.end; ++pos) actions.push_back(Action::shift());
    actions.push_back(Action::reduce(ch.label));
  }
  for (; pos < static_cast<int>(n); ++pos) actions.push_back(Action::out());
  return actions;
}

// An LSTM with a stack pointer: push advances from the current top state,
// pop restores the exact pre-push summary. The empty summary is the zero
// initial state.
class StackLstm {
 public:
  StackLstm(Tape& t, const LSTM& net) : tape_(&t), net_(&net) {
    init_ = net.initial_states(t);
    empty_summary_ = t.zeros_const({net.hidden_dim()});
  }

  void push(Var item, int meta) {
    const std::vector<LSTMState>& top = states_.empty() ? init_ : states_.back();
    states_.push_back(net_->step(*tape_, item, top));
    items_.push_back(item);
    metas_.push_back(meta);
  }

  std::pair<Var, int> pop() {
    if (empty()) throw std::logic_error("StackLstm: pop on empty stack");
    std::pair<Var, int> out{items_.back(), metas_.back()};
    items_.pop_back();
    metas_.pop_back();
    states_.pop_back();
    return out;
  }

  // bottom-to-top contents; leaves the stack empty
  std::vector<std::pair<Var, int>> pop_all() {
    std::vector<std::pair<Var, int>> out;
    out.reserve(items_.size());
    for (std::size_t i = 0; i < items_.size(); ++i)
      out.emplace_back(items_[i], metas_[i]);
    items_.clear();
    metas_.clear();
    states_.clear();
    return out;
  }

  Var summary() const {
    return states_.empty() ? empty_summary_ : states_.back().back().h;
  }

  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::vector<int>& metas() const { return metas_; }

 private:
  Tape* tape_;
  const LSTM* net_;
  std::vector<LSTMState> init_;
  Var empty_summary_;
  std::vector<std::vector<LSTMState>> states_;
  std::vector<Var> items_;
  std::vector<int> metas_;
};

class TransitionChunker;

// Algorithm state: output and scratch stacks, the buffer of unread words,
// and the action history. Owns nothing but tape handles; one per decode.
class ParserState {
 public:
  bool terminal() const { return stack_->empty() && buffer_->empty(); }

  std::size_t words_in_output() const { return words_in_output_; }
  std::size_t words_on_stack() const { return stack_->size(); }
  std::size_t words_on_buffer() const { return buffer_->size(); }
  std::size_t sentence_length() const { return n_; }

  const std::vector<Action>& history() const { return history_; }
  const std::vector<LabeledChunk>& emitted() const { return emitted_; }

 private:
  friend class TransitionChunker;

  std::unique_ptr<StackLstm> output_;
  std::unique_ptr<StackLstm> stack_;
  std::unique_ptr<StackLstm> buffer_;
  std::vector<LSTMState> hist_state_;
  bool hist_started_ = false;
  Var hist_empty_;
  std::vector<Action> history_;
  std::vector<LabeledChunk> emitted_;
  std::size_t n_ = 0;
  std::size_t words_in_output_ = 0;
};

// The Stack-LSTM chunker: a greedy shift-reduce labeler whose state summary
// (output, stack, buffer, action history) feeds a softmax over actions,
// trained on oracle action sequences.
class TransitionChunker : public Model {
 public:
  TransitionChunker(const RunConfig& cfg, Vocabulary vocab, Rng& rng)
      : cfg_(cfg),
        vocab_(std::move(vocab)),
        inventory_(vocab_.entity_labels()) {
    cfg_.model = "stack-lstm";
    scheme_ = *scheme_from_name(cfg_.scheme);
    WordRepConfig wc;
    wc.word_dim = cfg_.word_dim;
    wc.char_dim = cfg_.char_dim;
    wc.char_hidden = cfg_.char_hidden;
    wc.use_char = cfg_.use_char;
    wc.dropout = cfg_.resolved_dropout();
    wordrep_ = WordRep::create(params_, vocab_, wc, rng);

    int wdim = wordrep_.output_dim();
    int h = cfg_.stack_hidden;
    stack_net_ = LSTM::create(params_, "stack", wdim, h, cfg_.stack_layers,
                              rng, cfg_.full_peephole);
    buffer_net_ = LSTM::create(params_, "buffer", wdim, h, cfg_.stack_layers,
                               rng, cfg_.full_peephole);
    output_net_ = LSTM::create(params_, "output", cfg_.chunk_dim, h,
                               cfg_.stack_layers, rng, cfg_.full_peephole);
    history_net_ = LSTM::create(params_, "history", cfg_.action_dim, h,
                                cfg_.stack_layers, rng, cfg_.full_peephole);
    composer_ = BiLSTM::create(params_, "composer", wdim, cfg_.chunk_dim / 2,
                               rng, cfg_.full_peephole);
    int num_labels = static_cast<int>(inventory_.labels.size());
    // one row per entity label plus the null label for OUT
    label_emb_ = &params_.add("composer/label_embeddings",
                              uniform_init({num_labels + 1, wdim}, wdim, rng));
    action_emb_ = &params_.add(
        "history/action_embeddings",
        uniform_init({inventory_.size(), cfg_.action_dim}, cfg_.action_dim,
                     rng));
    cls_W1_ = &params_.add("classifier/W1",
                           uniform_init({cfg_.state_hidden, 4 * h}, 4 * h, rng));
    cls_b1_ = &params_.add("classifier/b1", Tensor::zeros({cfg_.state_hidden}));
    cls_W2_ = &params_.add(
        "classifier/W2",
        uniform_init({inventory_.size(), cfg_.state_hidden}, cfg_.state_hidden,
                     rng));
    cls_b2_ = &params_.add("classifier/b2",
                           Tensor::zeros({inventory_.size()}));
  }

  const char* model_type() const override { return "stack-lstm"; }
  const RunConfig& config() const override { return cfg_; }
  const Vocabulary& vocab() const override { return vocab_; }
  ParameterStore& params() override { return params_; }
  WordRep& wordrep() override { return wordrep_; }
  const ActionInventory& inventory() const { return inventory_; }
  TagScheme scheme() const { return scheme_; }

  const LSTM& stack_net() const { return stack_net_; }

  // Fresh state over the sentence; the buffer is loaded right to left so
  // popping yields words in order and its summary reflects upcoming words.
  ParserState start(Tape& t, const Sentence& s, Mode mode,
                    Rng* rng = nullptr) const {
    if (s.tokens.empty()) throw std::domain_error("start: empty sentence");
    ParserState st;
    st.n_ = s.tokens.size();
    st.output_ = std::make_unique<StackLstm>(t, output_net_);
    st.stack_ = std::make_unique<StackLstm>(t, stack_net_);
    st.buffer_ = std::make_unique<StackLstm>(t, buffer_net_);
    st.hist_state_ = history_net_.initial_states(t);
    st.hist_empty_ = t.zeros_const({history_net_.hidden_dim()});
    for (std::size_t i = s.tokens.size(); i-- > 0;)
      st.buffer_->push(wordrep_.embed(t, s.tokens[i], mode, rng),
                       static_cast<int>(i));
    return st;
  }

  // SHIFT iff the buffer is non-empty; OUT additionally needs an empty
  // stack; REDUCE(y) iff the stack is non-empty. Empty iff terminal.
  std::vector<int> valid_action_indices(const ParserState& st) const {
    std::vector<int> v;
    if (!st.buffer_->empty()) v.push_back(0);
    if (!st.buffer_->empty() && st.stack_->empty()) v.push_back(1);
    if (!st.stack_->empty())
      for (int i = 0; i < static_cast<int>(inventory_.labels.size()); ++i)
        v.push_back(2 + i);
    return v;
  }

  std::vector<Action> valid_actions(const ParserState& st) const {
    std::vector<Action> out;
    for (int i : valid_action_indices(st)) out.push_back(inventory_.action(i));
    return out;
  }

  bool is_valid(const ParserState& st, const Action& a) const {
    int idx;
    try {
      idx = inventory_.index(a);
    } catch (const std::domain_error&) {
      return false;
    }
    std::vector<int> v = valid_action_indices(st);
    return std::find(v.begin(), v.end(), idx) != v.end();
  }

  void apply(Tape& t, ParserState& st, const Action& a) const {
    if (!is_valid(st, a))
      throw std::logic_error("apply: invalid action " + a.name());
    switch (a.kind) {
      case Action::Kind::Shift: {
        auto [item, idx] = st.buffer_->pop();
        st.stack_->push(item, idx);
        break;
      }
      case Action::Kind::Out: {
        auto [item, idx] = st.buffer_->pop();
        st.output_->push(compose(t, {item}, null_label_row()), 1);
        st.words_in_output_ += 1;
        break;
      }
      case Action::Kind::Reduce: {
        std::vector<std::pair<Var, int>> items = st.stack_->pop_all();
        std::vector<Var> words;
        words.reserve(items.size());
        for (auto& [v, _] : items) words.push_back(v);
        int start = items.front().second;
        int end = items.back().second;
        int row = inventory_.index(a) - 2;
        st.output_->push(compose(t, words, row),
                         static_cast<int>(items.size()));
        st.words_in_output_ += items.size();
        st.emitted_.push_back({start, end, a.label});
        break;
      }
    }
    Var aemb = t.param_row(*action_emb_, inventory_.index(a));
    st.hist_state_ = history_net_.step(t, aemb, st.hist_state_);
    st.hist_started_ = true;
    st.history_.push_back(a);
  }

  // Unnormalized scores over the full inventory for the current state.
  Var action_scores(Tape& t, const ParserState& st) const {
    if (st.terminal())
      throw std::domain_error("action_scores: terminal state");
    Var hist = st.hist_started_ ? st.hist_state_.back().h : st.hist_empty_;
    Var summary = t.concat({st.output_->summary(), st.stack_->summary(),
                            st.buffer_->summary(), hist});
    Var h = t.relu(t.add(t.matvec(t.param(*cls_W1_), summary),
                         t.param(*cls_b1_)));
    return t.add(t.matvec(t.param(*cls_W2_), h), t.param(*cls_b2_));
  }

  // Probabilities over the full inventory; invalid actions get exactly 0.
  std::vector<double> action_distribution(Tape& t,
                                          const ParserState& st) const {
    Var scores = action_scores(t, st);
    const Tensor& sv = t.value(scores);
    std::vector<int> valid = valid_action_indices(st);
    double mx = -std::numeric_limits<double>::infinity();
    for (int i : valid) mx = std::max(mx, sv.at(i));
    double z = 0.0;
    for (int i : valid) z += std::exp(sv.at(i) - mx);
    std::vector<double> p(static_cast<std::size_t>(inventory_.size()), 0.0);
    for (int i : valid) p[static_cast<std::size_t>(i)] = std::exp(sv.at(i) - mx) / z;
    return p;
  }

  // Sum over oracle steps of -log p(gold action | state).
  Var train_loss(Tape& t, const Sentence& s,
                 const std::vector<LabeledChunk>& gold, Rng* rng,
                 Mode mode = Mode::Train) const {
    std::vector<Action> oracle = oracle_actions(s.tokens.size(), gold);
    ParserState st = start(t, s, mode, rng);
    Var loss = t.scalar_const(0.0);
    for (const Action& a : oracle) {
      Var scores = action_scores(t, st);
      std::vector<int> valid = valid_action_indices(st);
      Var log_z = t.logsumexp(t.gather(scores, valid));
      Var log_p = t.sub(t.pick(scores, inventory_.index(a)), log_z);
      loss = t.sub(loss, log_p);
      apply(t, st, a);
    }
    return loss;
  }

  Var example_loss(Tape& t, const Example& ex, Rng& rng) override {
    return train_loss(t, ex.sentence, ex.gold_chunks, &rng, Mode::Train);
  }

  // Greedy decode: the most probable valid action until termination, ties
  // broken by inventory order. At most 2n actions by construction.
  std::vector<LabeledChunk> greedy_decode(const Sentence& s) const {
    Tape t;
    ParserState st = start(t, s, Mode::Eval);
    while (!st.terminal()) {
      Var scores = action_scores(t, st);
      const Tensor& sv = t.value(scores);
      std::vector<int> valid = valid_action_indices(st);
      int best = valid.front();
      for (int i : valid)
        if (sv.at(i) > sv.at(best)) best = i;
      apply(t, st, inventory_.action(best));
    }
    return st.emitted();
  }

  std::vector<LabeledChunk> predict_chunks(const Sentence& s) const override {
    return greedy_decode(s);
  }

  std::vector<std::string> predict_tags(const Sentence& s) const override {
    return chunks_to_tags(predict_chunks(s), s.tokens.size(), scheme_);
  }

 private:
  int null_label_row() const {
    return static_cast<int>(inventory_.labels.size());
  }

  // g(u, ..., v, r_y): BiLSTM over the constituents plus the label
  // embedding; fixed output size regardless of chunk length.
  Var compose(Tape& t, std::vector<Var> words, int label_row) const {
    words.push_back(t.param_row(*label_emb_, label_row));
    return bilstm_final_concat(t, composer_, words);
  }

  RunConfig cfg_;
  Vocabulary vocab_;
  ParameterStore params_;
  ActionInventory inventory_;
  WordRep wordrep_;
  LSTM stack_net_;
  LSTM buffer_net_;
  LSTM output_net_;
  LSTM history_net_;
  BiLSTM composer_;
  Parameter* label_emb_ = nullptr;
  Parameter* action_emb_ = nullptr;
  Parameter* cls_W1_ = nullptr;
  Parameter* cls_b1_ = nullptr;
  Parameter* cls_W2_ = nullptr;
  Parameter* cls_b2_ = nullptr;
  TagScheme scheme_ = TagScheme::IOBES;
};

}  // namespace nerkit
