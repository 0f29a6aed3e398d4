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

#include <cstdio>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nerkit/nerkit.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Flags shared by `train`; each entry maps one CLI option onto a config key.
struct FlagSpec {
  const char* flag;
  const char* key;
  const char* help;
};

const FlagSpec kTrainOptions[] = {
    {"--model", "model", "model family: lstm-crf or stack-lstm"},
    {"--train", "train", "training corpus (CoNLL columns)"},
    {"--dev", "dev", "development corpus for checkpoint selection"},
    {"--out", "out", "output path for the model archive"},
    {"--scheme", "scheme", "training tag scheme: iobes or iob2"},
    {"--input-scheme", "input_scheme",
     "scheme of the input files: auto, iob1, iob2 or iobes"},
    {"--word-dim", "word_dim", "word embedding dimension"},
    {"--char-dim", "char_dim", "character embedding dimension"},
    {"--char-hidden", "char_hidden", "character LSTM hidden size"},
    {"--hidden", "hidden", "tagger BiLSTM hidden size per direction"},
    {"--proj-hidden", "proj_hidden", "hidden layer above the BiLSTM"},
    {"--stack-hidden", "stack_hidden", "chunker stack-LSTM hidden size"},
    {"--stack-layers", "stack_layers", "chunker stack-LSTM layers"},
    {"--action-dim", "action_dim", "action embedding dimension"},
    {"--chunk-dim", "chunk_dim", "composed chunk representation size"},
    {"--state-hidden", "state_hidden", "hidden layer before action softmax"},
    {"--dropout", "dropout", "dropout rate on the embedding layer"},
    {"--pretrained", "pretrained", "pretrained embedding file"},
    {"--lr", "learning_rate", "SGD learning rate"},
    {"--clip", "clip", "gradient clipping threshold (global L2)"},
    {"--epochs", "epochs", "number of training epochs"},
    {"--early-stop-f1", "early_stop_f1", "stop once dev F1 reaches this"},
    {"--seed", "seed", "random seed"},
    {"--min-word-freq", "min_word_freq", "minimum frequency to keep a word"},
};

std::string read_stdin() {
  return std::string(std::istreambuf_iterator<char>(std::cin),
                     std::istreambuf_iterator<char>());
}

int cmd_train(const std::string& config_path,
              const std::map<std::string, std::string>& overrides,
              const std::vector<std::string>& bool_overrides,
              const std::string& report_path) {
  nerkit::RunConfig cfg;
  if (!config_path.empty()) {
    std::string text;
    try {
      text = nerkit::read_file(config_path);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    nerkit::config_apply_text(cfg, text);
  }
  for (const FlagSpec& f : kTrainOptions) {
    auto it = overrides.find(f.key);
    if (it != overrides.end()) nerkit::config_set(cfg, f.key, it->second);
  }
  for (const std::string& kv : bool_overrides) {
    std::size_t eq = kv.find('=');
    nerkit::config_set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  cfg.validate();
  if (cfg.train_path.empty()) {
    std::cerr << "error: no training file given (--train)\n";
    return kExitUsage;
  }
  if (cfg.out_path.empty()) {
    std::cerr << "error: no output path given (--out)\n";
    return kExitUsage;
  }

  std::string train_text, dev_text;
  try {
    train_text = nerkit::read_file(cfg.train_path);
    if (!cfg.dev_path.empty()) dev_text = nerkit::read_file(cfg.dev_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::vector<nerkit::Sentence> train_sents =
      nerkit::prepare_tagged_sentences(train_text, cfg);
  if (train_sents.empty()) {
    std::cerr << "error: training file has no sentences: " << cfg.train_path
              << "\n";
    return kExitUsage;
  }
  std::vector<nerkit::Sentence> dev_sents =
      dev_text.empty() ? std::vector<nerkit::Sentence>{}
                       : nerkit::prepare_tagged_sentences(dev_text, cfg);

  nerkit::Vocabulary vocab =
      nerkit::build_vocab(train_sents, cfg.min_word_freq);
  nerkit::Rng rng(cfg.seed);
  std::unique_ptr<nerkit::Model> model =
      nerkit::make_model(cfg, std::move(vocab), rng);

  if (!cfg.pretrained.empty()) {
    nerkit::PretrainedLoad rep =
        model->wordrep().load_pretrained(cfg.pretrained);
    std::fprintf(stderr,
                 "pretrained: %d vectors, %d matched (%d lowercased), "
                 "%d random\n",
                 rep.file_vectors, rep.matched, rep.matched_lowercase,
                 rep.missing);
  }

  nerkit::TagScheme scheme = *nerkit::scheme_from_name(cfg.scheme);
  std::vector<nerkit::Example> train_ex =
      nerkit::prepare_examples(std::move(train_sents), model->vocab(), scheme);
  std::vector<nerkit::Example> dev_ex =
      nerkit::prepare_examples(std::move(dev_sents), model->vocab(), scheme);

  nerkit::TrainReport report = nerkit::train(*model, train_ex, dev_ex, rng);
  nerkit::write_file(cfg.out_path, nerkit::save_model(*model));

  std::string lines = report.to_lines();
  std::cout << lines;
  if (!report_path.empty()) nerkit::write_file(report_path, lines);
  return kExitOk;
}

int cmd_tag(const std::string& model_path, const std::string& input_path) {
  std::string archive;
  try {
    archive = nerkit::read_file(model_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  std::unique_ptr<nerkit::Model> model = nerkit::load_model(archive);

  std::string input =
      input_path.empty() ? read_stdin() : nerkit::read_file(input_path);
  nerkit::ConllOptions opts;
  opts.normalize = model->config().digit_norm;
  std::vector<nerkit::Sentence> sentences = nerkit::parse_conll(input, opts);

  std::vector<std::vector<std::string>> tags;
  tags.reserve(sentences.size());
  for (const nerkit::Sentence& s : sentences)
    tags.push_back(model->predict_tags(s));
  std::cout << nerkit::write_conll(sentences, &tags);
  return kExitOk;
}

int cmd_eval(const std::string& pred_path, const std::string& gold_path,
             const std::string& scheme_flag) {
  std::string pred_text, gold_text;
  try {
    pred_text = nerkit::read_file(pred_path);
    gold_text = nerkit::read_file(gold_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  nerkit::ConllOptions opts;
  opts.normalize = false;
  std::vector<nerkit::Sentence> pred = nerkit::parse_conll(pred_text, opts);
  std::vector<nerkit::Sentence> gold = nerkit::parse_conll(gold_text, opts);

  if (pred.size() != gold.size()) {
    std::cerr << "error: sentence count mismatch at sentence "
              << std::min(pred.size(), gold.size()) << " (pred " << pred.size()
              << ", gold " << gold.size() << ")\n";
    return kExitRuntime;
  }
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i].tokens.size() != gold[i].tokens.size()) {
      std::cerr << "error: token count mismatch at sentence " << i << "\n";
      return kExitRuntime;
    }
  }

  auto collect = [](const std::vector<nerkit::Sentence>& ss) {
    std::vector<std::vector<std::string>> tags;
    for (const nerkit::Sentence& s : ss) {
      std::vector<std::string> ts;
      for (const nerkit::Token& t : s.tokens)
        ts.push_back(t.gold_tag.value_or("O"));
      tags.push_back(std::move(ts));
    }
    return tags;
  };
  std::vector<std::vector<std::string>> pred_tags = collect(pred);
  std::vector<std::vector<std::string>> gold_tags = collect(gold);

  nerkit::TagScheme scheme;
  if (scheme_flag == "auto") {
    std::optional<nerkit::TagScheme> detected = nerkit::detect_scheme(gold);
    if (!detected) {
      std::cerr << "error: could not detect the gold tagging scheme\n";
      return kExitRuntime;
    }
    scheme = *detected;
  } else {
    auto s = nerkit::scheme_from_name(scheme_flag);
    if (!s) {
      std::cerr << "error: unknown scheme '" << scheme_flag << "'\n";
      return kExitUsage;
    }
    scheme = *s;
  }

  nerkit::EvalReport report =
      nerkit::evaluate_tags(pred_tags, gold_tags, scheme);
  std::cout << report.to_table() << report.to_kv_lines();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nerkit: train, run and score neural named-entity taggers"};
  app.require_subcommand(1);

  CLI::App* train = app.add_subcommand(
      "train", "train a model on a CoNLL corpus and write a model archive");
  std::map<std::string, std::string> values;
  std::vector<CLI::Option*> opts;
  for (const FlagSpec& f : kTrainOptions)
    opts.push_back(train->add_option(f.flag, values[f.key], f.help));
  std::string config_path, report_path;
  train->add_option("--config", config_path,
                    "config file with key=value lines (flags win)");
  train->add_option("--report", report_path,
                    "also write the per-epoch report to this file");
  bool no_char = false, no_digit_norm = false, constrain = false,
       full_peephole = false;
  train->add_flag("--no-char", no_char, "disable the character model");
  train->add_flag("--no-digit-norm", no_digit_norm,
                  "keep digits instead of normalizing them to 0");
  train->add_flag("--constrain-decode", constrain,
                  "mask scheme-invalid transitions at decode time");
  train->add_flag("--full-peephole", full_peephole,
                  "use full-matrix cell-state peepholes");

  CLI::App* tag = app.add_subcommand(
      "tag", "read CoNLL tokens and emit token/predicted-tag lines");
  std::string model_path, input_path;
  tag->add_option("--model", model_path, "model archive")->required();
  tag->add_option("--input", input_path, "input file (default: stdin)");

  CLI::App* eval = app.add_subcommand(
      "eval", "entity-level precision/recall/F1 of predictions vs gold");
  std::string pred_path, gold_path, scheme_flag = "auto";
  eval->add_option("--pred", pred_path, "predictions (CoNLL)")->required();
  eval->add_option("--gold", gold_path, "gold annotations (CoNLL)")->required();
  eval->add_option("--scheme", scheme_flag,
                   "gold tag scheme (auto, iob1, iob2, iobes)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train->parsed()) {
      std::map<std::string, std::string> overrides;
      for (std::size_t i = 0; i < opts.size(); ++i)
        if (opts[i]->count() > 0)
          overrides[kTrainOptions[i].key] = values[kTrainOptions[i].key];
      std::vector<std::string> bools;
      if (no_char) bools.push_back("use_char=false");
      if (no_digit_norm) bools.push_back("digit_norm=false");
      if (constrain) bools.push_back("constrain_decode=true");
      if (full_peephole) bools.push_back("full_peephole=true");
      return cmd_train(config_path, overrides, bools, report_path);
    }
    if (tag->parsed()) return cmd_tag(model_path, input_path);
    if (eval->parsed()) return cmd_eval(pred_path, gold_path, scheme_flag);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
