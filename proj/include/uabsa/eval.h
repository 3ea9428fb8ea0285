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

#ifndef UABSA_EVAL_H_
#define UABSA_EVAL_H_

// Aspect extraction is scored by exact-match span F1; polarity
// classification by accuracy and macro F1 over the polarity classes that
// occur in gold or predictions.

#include <array>
#include <concepts>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"
#include "uabsa/bio.h"
#include "uabsa/corpus.h"
#include "uabsa/error.h"

namespace uabsa {

// Sentence id -> set of spans.
using SpanSets = std::map<int, std::set<Span>>;

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  friend bool operator==(const Prf &, const Prf &) = default;
};

inline double harmonic_mean(double p, double r) {
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Precision of an empty prediction set is 1 (no false positives); recall
// against an empty gold set is 1.
inline Prf prf_from_counts(size_t tp, size_t n_pred, size_t n_gold) {
  Prf out;
  out.precision = n_pred == 0 ? 1.0 : static_cast<double>(tp) / n_pred;
  out.recall = n_gold == 0 ? 1.0 : static_cast<double>(tp) / n_gold;
  out.f1 = harmonic_mean(out.precision, out.recall);
  return out;
}

inline Prf span_f1(const SpanSets &pred, const SpanSets &gold) {
  size_t tp = 0, n_pred = 0, n_gold = 0;
  for (const auto &[id, spans] : pred) {
    n_pred += spans.size();
    auto it = gold.find(id);
    if (it == gold.end()) continue;
    for (const Span &s : spans) tp += it->second.count(s);
  }
  for (const auto &[id, spans] : gold) n_gold += spans.size();
  return prf_from_counts(tp, n_pred, n_gold);
}

struct ApcMetrics {
  double accuracy = 0;
  double macro_f1 = 0;
  // NaN-free: classes absent from both gold and predictions have f1 0 and
  // present == false.
  std::array<double, kNumPolarities> f1{};
  std::array<bool, kNumPolarities> present{};
  std::array<size_t, kNumPolarities> support{};
};

inline ApcMetrics apc_metrics(const std::vector<Polarity> &pred,
                              const std::vector<Polarity> &gold) {
  if (pred.size() != gold.size()) {
    throw ConfigError("apc_metrics: " + std::to_string(pred.size()) +
                      " predictions for " + std::to_string(gold.size()) + " gold labels");
  }
  ApcMetrics m;
  if (gold.empty()) {
    m.accuracy = 1.0;
    m.macro_f1 = 1.0;
    return m;
  }
  std::array<size_t, kNumPolarities> tp{}, fp{}, fn{};
  size_t correct = 0;
  for (size_t i = 0; i < gold.size(); ++i) {
    const int g = static_cast<int>(gold[i]), p = static_cast<int>(pred[i]);
    ++m.support[g];
    if (g == p) {
      ++correct;
      ++tp[g];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  m.accuracy = static_cast<double>(correct) / gold.size();
  int classes = 0;
  double sum = 0;
  for (int c = 0; c < kNumPolarities; ++c) {
    m.present[c] = tp[c] + fp[c] + fn[c] > 0;
    if (!m.present[c]) continue;
    m.f1[c] = 2.0 * tp[c] / (2.0 * tp[c] + fp[c] + fn[c]);
    sum += m.f1[c];
    ++classes;
  }
  m.macro_f1 = sum / classes;
  return m;
}

struct MetricReport {
  double ate_precision = 0, ate_recall = 0, ate_f1 = 0;
  double apc_accuracy = 0, apc_f1_macro = 0;
  std::array<double, kNumPolarities> apc_f1_per_class{};
  std::array<size_t, kNumPolarities> apc_support{};
  size_t sentences = 0;
  size_t gold_aspects = 0;
  size_t predicted_aspects = 0;
  int bio_repairs = 0;
  // Polarity scored on extracted spans: a (span, polarity) pair is correct
  // only if both match gold.
  Prf joint;

  friend bool operator==(const MetricReport &, const MetricReport &) = default;
};

// Anything that can tag a token sequence and classify a span of it.
template <typename M>
concept AspectModel = requires(const M &m, const std::vector<std::string> &tokens,
                               Span span) {
  { m.tag(tokens) } -> std::convertible_to<std::vector<Tag>>;
  { m.classify(tokens, span) } -> std::convertible_to<Polarity>;
};

// Answers with the gold annotation of the sentences it was built from.
class GoldEchoModel {
 public:
  explicit GoldEchoModel(const std::vector<AtepcSentence> &sentences) {
    for (const AtepcSentence &s : sentences) {
      const std::string key = join(s.tokens);
      tags_.emplace(key, s.tags);
      if (auto span = s.focused_span()) {
        polarity_.emplace(std::make_pair(key, *span), *s.focused_polarity());
      }
    }
  }
  std::vector<Tag> tag(const std::vector<std::string> &tokens) const {
    auto it = tags_.find(join(tokens));
    return it == tags_.end() ? std::vector<Tag>(tokens.size(), Tag::kO) : it->second;
  }
  Polarity classify(const std::vector<std::string> &tokens, Span span) const {
    auto it = polarity_.find({join(tokens), span});
    return it == polarity_.end() ? Polarity::kNeutral : it->second;
  }

 private:
  std::map<std::string, std::vector<Tag>> tags_;
  std::map<std::pair<std::string, Span>, Polarity> polarity_;
};

// Scores a model on ATEPC test data. Sentence copies (one per aspect) are
// collapsed for extraction; every copy contributes one polarity decision on
// its gold focused span.
template <AspectModel M>
MetricReport evaluate(const M &model, const std::vector<AtepcSentence> &test) {
  if (test.empty()) throw ConfigError("evaluate: empty test set");
  MetricReport r;
  std::map<std::string, int> ids;
  std::vector<const AtepcSentence *> unique;
  std::vector<std::vector<std::pair<Span, Polarity>>> gold_pairs;
  for (const AtepcSentence &s : test) {
    auto [it, inserted] = ids.emplace(join(s.tokens), static_cast<int>(unique.size()));
    if (inserted) {
      unique.push_back(&s);
      gold_pairs.emplace_back();
    }
    if (auto span = s.focused_span()) {
      gold_pairs[it->second].emplace_back(*span, *s.focused_polarity());
    }
  }
  r.sentences = unique.size();

  SpanSets pred_spans, gold_spans;
  std::set<std::tuple<int, Span, Polarity>> pred_joint, gold_joint;
  for (int id = 0; id < static_cast<int>(unique.size()); ++id) {
    const AtepcSentence &s = *unique[id];
    auto &gold = gold_spans[id];
    for (const Span &sp : tag_spans(s.tags)) gold.insert(sp);
    BioDecoding dec = decode_bio(model.tag(s.tokens));
    r.bio_repairs += dec.repairs;
    auto &pred = pred_spans[id];
    for (const Span &sp : dec.spans) {
      pred.insert(sp);
      pred_joint.emplace(id, sp, model.classify(s.tokens, sp));
    }
    for (const auto &[sp, pol] : gold_pairs[id]) gold_joint.emplace(id, sp, pol);
    r.gold_aspects += gold.size();
    r.predicted_aspects += pred.size();
  }
  const Prf ate = span_f1(pred_spans, gold_spans);
  r.ate_precision = ate.precision;
  r.ate_recall = ate.recall;
  r.ate_f1 = ate.f1;

  std::vector<Polarity> pred_pol, gold_pol;
  for (const AtepcSentence &s : test) {
    auto span = s.focused_span();
    if (!span) continue;
    gold_pol.push_back(*s.focused_polarity());
    pred_pol.push_back(model.classify(s.tokens, *span));
  }
  const ApcMetrics apc = apc_metrics(pred_pol, gold_pol);
  r.apc_accuracy = apc.accuracy;
  r.apc_f1_macro = apc.macro_f1;
  r.apc_f1_per_class = apc.f1;
  r.apc_support = apc.support;

  size_t tp = 0;
  for (const auto &t : pred_joint) tp += gold_joint.count(t);
  r.joint = prf_from_counts(tp, pred_joint.size(), gold_joint.size());
  return r;
}

inline nlohmann::ordered_json report_to_json(const MetricReport &r) {
  nlohmann::ordered_json j;
  j["ate_precision"] = r.ate_precision;
  j["ate_recall"] = r.ate_recall;
  j["ate_f1"] = r.ate_f1;
  j["apc_accuracy"] = r.apc_accuracy;
  j["apc_f1_macro"] = r.apc_f1_macro;
  nlohmann::ordered_json per_class, support;
  for (Polarity p : kAllPolarities) {
    per_class[std::string(to_string(p))] = r.apc_f1_per_class[static_cast<int>(p)];
    support[std::string(to_string(p))] = r.apc_support[static_cast<int>(p)];
  }
  j["apc_f1_per_class"] = per_class;
  j["apc_support"] = support;
  j["joint_precision"] = r.joint.precision;
  j["joint_recall"] = r.joint.recall;
  j["joint_f1"] = r.joint.f1;
  j["sentences"] = r.sentences;
  j["gold_aspects"] = r.gold_aspects;
  j["predicted_aspects"] = r.predicted_aspects;
  j["bio_repairs"] = r.bio_repairs;
  return j;
}

// Rows of models against ATE F1 and APC macro-F1 columns.
inline std::string format_table(
    const std::vector<std::pair<std::string, MetricReport>> &rows) {
  size_t width = 5;
  for (const auto &[name, _] : rows) width = std::max(width, name.size());
  std::string out;
  char buf[64];
  out += std::string(width, ' ') + " | ATE    | APC   \n";
  out += std::string(width, '-') + "-+--------+-------\n";
  for (const auto &[name, r] : rows) {
    out += name + std::string(width - name.size(), ' ');
    std::snprintf(buf, sizeof buf, " | %.4f | %.4f\n", r.ate_f1, r.apc_f1_macro);
    out += buf;
  }
  return out;
}

}  // namespace uabsa

#endif  // UABSA_EVAL_H_
