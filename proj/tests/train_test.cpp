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

#include <gtest/gtest.h>

#include <set>

#include "uabsa/synthetic.h"
#include "uabsa/train.h"

namespace uabsa {
namespace {

std::vector<AtepcSentence> corpus(int sentences, uint64_t seed = 1) {
  return apc_to_atepc(synthetic_apc_corpus(sentences, seed));
}

std::set<std::string> sentence_keys(const std::vector<AtepcSentence> &v) {
  std::set<std::string> keys;
  for (const auto &s : v) keys.insert(join(s.tokens));
  return keys;
}

ModelConfig small_model() {
  ModelConfig c;
  c.d_model = 32;
  c.n_heads = 4;
  c.n_layers = 1;
  c.max_len = 64;
  c.dropout = 0.0;
  return c;
}

TEST(Split, PaperSizes) {
  const auto data = corpus(2500);
  const Split s = split(data, TrainConfig{});
  EXPECT_EQ(sentence_keys(s.train).size(), 2250u);
  EXPECT_EQ(sentence_keys(s.test).size(), 250u);
  EXPECT_EQ(s.train.size() + s.test.size(), data.size());
  for (const auto &k : sentence_keys(s.test)) EXPECT_EQ(sentence_keys(s.train).count(k), 0u);
}

TEST(Split, ProportionalFallbackAndDeterminism) {
  const auto data = corpus(100);
  const Split a = split(data, TrainConfig{});
  EXPECT_EQ(sentence_keys(a.train).size(), 90u);
  EXPECT_EQ(sentence_keys(a.test).size(), 10u);
  const Split b = split(data, TrainConfig{});
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  TrainConfig other;
  other.seed = 43;
  EXPECT_NE(split(data, other).test, a.test);
  EXPECT_THROW(split({}, TrainConfig{}), ConfigError);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.num_epochs = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.learning_rate = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Trainer, LossOnAFrozenBatchDecreasesForFiveSteps) {
  const auto data = corpus(40);
  for (double lr : {2e-4, 1e-3}) {
    LcfModel<float> model(small_model(), Vocabulary::build(data));
    TrainConfig cfg;
    cfg.learning_rate = lr;
    Trainer<float> trainer(model, cfg);
    std::vector<const AtepcSentence *> batch;
    for (int i = 0; i < 16; ++i) batch.push_back(&data[i]);
    double previous = trainer.step(batch, false).total;
    for (int step = 0; step < 5; ++step) {
      const double now = trainer.step(batch, false).total;
      EXPECT_LT(now, previous) << "lr " << lr << " step " << step;
      previous = now;
    }
  }
}

TEST(Trainer, OneTrivialSentenceIsLearned) {
  const auto data = apc_to_atepc({{{"great", "trail"}, {1, 1}, Polarity::kPositive}});
  LcfModel<float> model(small_model(), Vocabulary::build(data));
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.num_epochs = 20;
  cfg.evaluate_each_epoch = false;
  const TrainHistory h = train(model, data, {}, cfg);
  ASSERT_EQ(h.size(), 20u);
  EXPECT_LT(h.back().tag_loss + h.back().polarity_loss, h.front().tag_loss + h.front().polarity_loss);
}

TEST(Trainer, DeterministicForAFixedSeed) {
  const auto data = corpus(60);
  TrainConfig cfg;
  cfg.num_epochs = 2;
  ModelConfig mc = small_model();
  mc.dropout = 0.1;
  const auto a = fit<float>(data, mc, cfg);
  const auto b = fit<float>(data, mc, cfg);
  EXPECT_TRUE(a.model.params() == b.model.params());
  ASSERT_EQ(a.history.size(), 2u);
  for (size_t i = 0; i < a.history.size(); ++i) EXPECT_TRUE(a.history[i].same_result(b.history[i]));
  cfg.seed = 7;
  mc.seed = 7;
  EXPECT_FALSE(fit<float>(data, mc, cfg).model.params() == a.model.params());
}

TEST(Trainer, NonFiniteLossNamesTheBatch) {
  const auto data = corpus(20);
  LcfModel<float> model(small_model(), Vocabulary::build(data));
  model.params().polarity_b(0, 0) = std::numeric_limits<float>::quiet_NaN();
  TrainConfig cfg;
  cfg.evaluate_each_epoch = false;
  try {
    train(model, data, {}, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError &e) {
    EXPECT_NE(std::string(e.what()).find("epoch 1, batch 0"), std::string::npos) << e.what();
  }
}

TEST(Trainer, RejectsSentencesLongerThanMaxLen) {
  const auto data = corpus(20);
  ModelConfig mc = small_model();
  mc.max_len = 4;
  LcfModel<float> model(mc, Vocabulary::build(data));
  EXPECT_THROW(train(model, data, {}, TrainConfig{}), ConfigError);
}

TEST(Trainer, SeparableCorpusIsFitted) {
  // Overfit oracle at reduced scale: six epochs on template data must
  // extract the training aspects almost perfectly.
  const auto data = corpus(400, 5);
  TrainConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.evaluate_each_epoch = false;
  ModelConfig mc;
  mc.lcf_mode = LcfMode::kCdm;
  const auto fitted = fit<float>(data, mc, cfg);
  ASSERT_EQ(fitted.history.size(), 6u);
  for (const auto &e : fitted.history) {
    EXPECT_TRUE(std::isfinite(e.tag_loss));
    EXPECT_GE(e.polarity_loss, 0.0);
  }
  const MetricReport r = evaluate(fitted.model, fitted.data.train);
  EXPECT_GE(r.ate_f1, 0.95);
}

TEST(History, JsonLines) {
  TrainHistory h(2);
  h[0].epoch = 1;
  h[1].epoch = 2;
  const std::string text = history_to_jsonl(h);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(nlohmann::json::parse(text.substr(0, text.find('\n')))["epoch"], 1);
}

}  // namespace
}  // namespace uabsa
