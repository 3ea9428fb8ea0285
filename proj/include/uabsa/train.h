// Copyright 2026 The uabsa Authors.
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

#ifndef UABSA_TRAIN_H_
#define UABSA_TRAIN_H_

// Joint mini-batch training of the tag and polarity heads with Adam.
// All randomness (split, batch order, dropout) is derived from one seed.

#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uabsa/corpus.h"
#include "uabsa/error.h"
#include "uabsa/eval.h"
#include "uabsa/loss.h"
#include "uabsa/model.h"
#include "uabsa/random.h"

namespace uabsa {

struct TrainConfig {
  int train_size = 2250;
  int test_size = 250;
  int batch_size = 16;
  int num_epochs = 6;
  double learning_rate = 2e-4;
  double tag_loss_weight = 1.0;
  double polarity_loss_weight = 1.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  uint64_t seed = 42;
  bool evaluate_each_epoch = true;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (num_epochs < 1) throw ConfigError("num_epochs must be >= 1");
    if (train_size < 1 || test_size < 0) {
      throw ConfigError("train_size must be >= 1 and test_size >= 0");
    }
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be positive");
    if (!(tag_loss_weight > 0) || !(polarity_loss_weight > 0)) {
      throw ConfigError("loss weights must be positive");
    }
  }
};

struct EpochRecord {
  int epoch = 0;
  double tag_loss = 0;
  double polarity_loss = 0;
  double ate_f1 = 0;
  double apc_f1 = 0;
  double seconds = 0;

  // Everything except wall-clock time.
  bool same_result(const EpochRecord &o) const {
    return epoch == o.epoch && tag_loss == o.tag_loss &&
           polarity_loss == o.polarity_loss && ate_f1 == o.ate_f1 &&
           apc_f1 == o.apc_f1;
  }
};

using TrainHistory = std::vector<EpochRecord>;

inline nlohmann::ordered_json epoch_to_json(const EpochRecord &e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["tag_loss"] = e.tag_loss;
  j["polarity_loss"] = e.polarity_loss;
  j["ate_f1"] = e.ate_f1;
  j["apc_f1"] = e.apc_f1;
  j["seconds"] = e.seconds;
  return j;
}

inline std::string history_to_jsonl(const TrainHistory &h) {
  std::string out;
  for (const EpochRecord &e : h) out += epoch_to_json(e).dump() + "\n";
  return out;
}

struct Split {
  std::vector<AtepcSentence> train;
  std::vector<AtepcSentence> test;
};

// Shuffles whole sentences (all per-aspect copies of a sentence stay
// together) and takes train_size then test_size of them. Corpora smaller
// than train_size + test_size are split 90/10.
inline Split split(const std::vector<AtepcSentence> &corpus, const TrainConfig &cfg) {
  if (corpus.empty()) throw ConfigError("cannot split an empty corpus");
  std::map<std::string, size_t> index;
  std::vector<std::vector<size_t>> groups;
  for (size_t i = 0; i < corpus.size(); ++i) {
    auto [it, inserted] = index.emplace(join(corpus[i].tokens), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  std::vector<size_t> order(groups.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(cfg.seed);
  rng.shuffle(order);

  size_t n_train, n_test;
  const size_t g = groups.size();
  if (g >= static_cast<size_t>(cfg.train_size) + cfg.test_size) {
    n_train = cfg.train_size;
    n_test = cfg.test_size;
  } else {
    n_test = static_cast<size_t>(std::llround(0.1 * static_cast<double>(g)));
    if (n_test == 0 && g >= 2) n_test = 1;
    n_train = g - n_test;
  }
  Split out;
  for (size_t k = 0; k < n_train + n_test; ++k) {
    auto &dst = k < n_train ? out.train : out.test;
    for (size_t i : groups[order[k]]) dst.push_back(corpus[i]);
  }
  return out;
}

inline std::vector<int> gold_tag_ids(const AtepcSentence &s) {
  std::vector<int> ids(s.tags.size());
  for (size_t i = 0; i < s.tags.size(); ++i) ids[i] = static_cast<int>(s.tags[i]);
  return ids;
}

template <typename T>
class Adam {
 public:
  Adam(const ModelConfig &cfg, double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : m_(Parameters<T>::shaped(cfg)),
        v_(Parameters<T>::shaped(cfg)),
        lr_(lr),
        beta1_(beta1),
        beta2_(beta2),
        eps_(eps) {}

  void step(Parameters<T> &params, const Parameters<T> &grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, t_);
    const double c2 = 1.0 - std::pow(beta2_, t_);
    const T b1 = T(beta1_), b2 = T(beta2_);
    const T step = T(lr_ * std::sqrt(c2) / c1);
    const T eps = T(eps_ * std::sqrt(c2));
    auto p = params.tensors();
    auto g = grads.tensors();
    auto m = m_.tensors();
    auto v = v_.tensors();
    for (size_t k = 0; k < p.size(); ++k) {
      auto pv = p[k]->values();
      auto gv = g[k]->values();
      auto mv = m[k]->values();
      auto vv = v[k]->values();
      for (size_t i = 0; i < pv.size(); ++i) {
        mv[i] = b1 * mv[i] + (T(1) - b1) * gv[i];
        vv[i] = b2 * vv[i] + (T(1) - b2) * gv[i] * gv[i];
        pv[i] -= step * mv[i] / (std::sqrt(vv[i]) + eps);
      }
    }
  }

  long steps() const { return t_; }

 private:
  Parameters<T> m_, v_;
  long t_ = 0;
  double lr_, beta1_, beta2_, eps_;
};

struct BatchLoss {
  double total = 0;
  double tag = 0;
  double polarity = 0;
};

// Mean joint loss of a batch and its gradient, accumulated into grads.
// dropout_rng == nullptr runs without dropout.
template <typename T>
BatchLoss batch_loss_and_grad(const LcfModel<T> &model,
                              const std::vector<const AtepcSentence *> &batch,
                              const TrainConfig &cfg, Parameters<T> &grads,
                              Rng *dropout_rng) {
  BatchLoss out;
  const LossWeights weights{cfg.tag_loss_weight, cfg.polarity_loss_weight};
  const T scale = T(1) / T(batch.size());
  for (const AtepcSentence *s : batch) {
    EncoderTrace<T> trace;
    const std::vector<int> ids = model.vocab().encode(s->tokens);
    model.encode(ids, &trace, dropout_rng);
    Matrix<T> tag_logits = model.tag_logits(trace.states);
    const auto span = s->focused_span();
    std::optional<std::array<T, kNumPolarities>> pol;
    if (span) pol = model.polarity_logits(trace.states, *span);
    const std::vector<int> gold = gold_tag_ids(*s);
    JointLoss<T> loss = joint_loss<T>(tag_logits, gold, pol ? &*pol : nullptr,
                                      s->focused_polarity(), weights);
    for (T &v : loss.d_tag_logits.values()) v *= scale;
    for (T &v : loss.d_polarity_logits) v *= scale;
    model.backward(trace, loss.d_tag_logits, span,
                   span ? &loss.d_polarity_logits : nullptr, grads);
    out.total += static_cast<double>(loss.total);
    out.tag += static_cast<double>(loss.tag_term);
    out.polarity += static_cast<double>(loss.polarity_term);
  }
  out.total /= batch.size();
  out.tag /= batch.size();
  out.polarity /= batch.size();
  return out;
}

template <typename T>
class Trainer {
 public:
  Trainer(LcfModel<T> &model, TrainConfig cfg)
      : model_(model),
        cfg_(cfg),
        adam_(model.config(), cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
              cfg.adam_eps),
        grads_(Parameters<T>::shaped(model.config())),
        order_rng_(cfg.seed ^ 0x9E3779B97F4A7C15ULL),
        dropout_rng_(cfg.seed ^ 0xD1B54A32D192ED03ULL) {
    cfg_.validate();
  }

  // One optimizer update on a batch; returns the pre-update loss.
  BatchLoss step(const std::vector<const AtepcSentence *> &batch, bool dropout = true) {
    grads_.set_zero();
    BatchLoss loss = batch_loss_and_grad(model_, batch, cfg_, grads_,
                                         dropout ? &dropout_rng_ : nullptr);
    if (!std::isfinite(loss.total)) {
      throw NumericError("non-finite loss at step " + std::to_string(adam_.steps()));
    }
    adam_.step(model_.params(), grads_);
    return loss;
  }

  TrainHistory run(const std::vector<AtepcSentence> &train,
                   const std::vector<AtepcSentence> &test,
                   const std::function<void(const EpochRecord &)> &on_epoch = {}) {
    if (train.empty()) throw ConfigError("training split is empty");
    for (const AtepcSentence &s : train) {
      if (s.size() > model_.config().max_len) {
        throw ConfigError("training sentence of " + std::to_string(s.size()) +
                          " tokens exceeds max_len " +
                          std::to_string(model_.config().max_len));
      }
    }
    TrainHistory history;
    std::vector<size_t> order(train.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (int epoch = 1; epoch <= cfg_.num_epochs; ++epoch) {
      const auto start = std::chrono::steady_clock::now();
      order_rng_.shuffle(order);
      EpochRecord rec;
      rec.epoch = epoch;
      size_t batches = 0;
      for (size_t b = 0; b < order.size(); b += cfg_.batch_size) {
        std::vector<const AtepcSentence *> batch;
        for (size_t i = b; i < std::min(order.size(), b + cfg_.batch_size); ++i) {
          batch.push_back(&train[order[i]]);
        }
        BatchLoss loss;
        try {
          loss = step(batch);
        } catch (const NumericError &) {
          throw NumericError("non-finite loss in epoch " + std::to_string(epoch) +
                             ", batch " + std::to_string(batches));
        }
        if (!model_.params().all_finite()) {
          throw NumericError("non-finite parameters after epoch " +
                             std::to_string(epoch) + ", batch " +
                             std::to_string(batches));
        }
        rec.tag_loss += loss.tag * batch.size();
        rec.polarity_loss += loss.polarity * batch.size();
        ++batches;
      }
      rec.tag_loss /= train.size();
      rec.polarity_loss /= train.size();
      if (cfg_.evaluate_each_epoch && !test.empty()) {
        const MetricReport r = evaluate(model_, test);
        rec.ate_f1 = r.ate_f1;
        rec.apc_f1 = r.apc_f1_macro;
      }
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                        .count();
      history.push_back(rec);
      if (on_epoch) on_epoch(rec);
    }
    return history;
  }

 private:
  LcfModel<T> &model_;
  TrainConfig cfg_;
  Adam<T> adam_;
  Parameters<T> grads_;
  Rng order_rng_;
  Rng dropout_rng_;
};

template <typename T>
TrainHistory train(LcfModel<T> &model, const std::vector<AtepcSentence> &train_set,
                   const std::vector<AtepcSentence> &test_set, const TrainConfig &cfg,
                   const std::function<void(const EpochRecord &)> &on_epoch = {}) {
  return Trainer<T>(model, cfg).run(train_set, test_set, on_epoch);
}

template <typename T>
struct FitResult {
  LcfModel<T> model;
  TrainHistory history;
  Split data;
};

// Splits the corpus and trains a fresh model on the training part.
template <typename T = float>
FitResult<T> fit(const std::vector<AtepcSentence> &corpus, ModelConfig model_cfg,
                 const TrainConfig &cfg,
                 const std::function<void(const EpochRecord &)> &on_epoch = {}) {
  cfg.validate();
  Split data = split(corpus, cfg);
  LcfModel<T> model(model_cfg, Vocabulary::build(data.train));
  TrainHistory history = train(model, data.train, data.test, cfg, on_epoch);
  return {std::move(model), std::move(history), std::move(data)};
}

}  // namespace uabsa

#endif  // UABSA_TRAIN_H_
