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

#ifndef UABSA_LOSS_H_
#define UABSA_LOSS_H_

// Joint objective: weighted sum of the mean token-tag cross-entropy (PAD
// positions excluded) and the aspect-polarity cross-entropy.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "uabsa/corpus.h"
#include "uabsa/error.h"
#include "uabsa/tensor.h"

namespace uabsa {

// Gold tag id marking a position that does not contribute to the loss.
inline constexpr int kPadTag = -1;

struct LossWeights {
  double tag = 1.0;
  double polarity = 1.0;
};

template <typename T>
struct JointLoss {
  T total = 0;
  T tag_term = 0;
  T polarity_term = 0;
  Matrix<T> d_tag_logits;
  std::array<T, kNumPolarities> d_polarity_logits{};
};

// -log softmax(logits)[gold]; writes softmax(logits) - onehot(gold) into grad.
template <typename T>
T cross_entropy(const T *logits, int classes, int gold, T *grad) {
  T mx = logits[0];
  for (int k = 1; k < classes; ++k) mx = std::max(mx, logits[k]);
  T sum = 0;
  for (int k = 0; k < classes; ++k) sum += std::exp(logits[k] - mx);
  const T log_z = mx + std::log(sum);
  if (grad) {
    for (int k = 0; k < classes; ++k) {
      grad[k] = std::exp(logits[k] - log_z) - (k == gold ? T(1) : T(0));
    }
  }
  return log_z - logits[gold];
}

template <typename T>
JointLoss<T> joint_loss(const Matrix<T> &tag_logits, std::span<const int> gold_tags,
                        const std::array<T, kNumPolarities> *polarity_logits,
                        std::optional<Polarity> gold_polarity,
                        LossWeights weights = {}) {
  if (tag_logits.cols() != kNumTags ||
      tag_logits.rows() != static_cast<int>(gold_tags.size())) {
    throw ConfigError("tag logits are " + std::to_string(tag_logits.rows()) +
                      "x" + std::to_string(tag_logits.cols()) + " but " +
                      std::to_string(gold_tags.size()) + " gold tags were given");
  }
  if ((polarity_logits != nullptr) != gold_polarity.has_value()) {
    throw ConfigError("gold polarity must be given exactly when polarity logits are");
  }
  JointLoss<T> out;
  const int n = tag_logits.rows();
  out.d_tag_logits.resize(n, kNumTags);
  int counted = 0;
  for (int i = 0; i < n; ++i) {
    if (gold_tags[i] != kPadTag) ++counted;
  }
  for (int i = 0; i < n; ++i) {
    const int gold = gold_tags[i];
    if (gold == kPadTag) continue;
    if (gold < 0 || gold >= kNumTags) throw ConfigError("gold tag out of range");
    T *grad = out.d_tag_logits.row(i);
    out.tag_term += cross_entropy(tag_logits.row(i), kNumTags, gold, grad);
    const T scale = T(weights.tag) / T(counted);
    for (int k = 0; k < kNumTags; ++k) grad[k] *= scale;
  }
  if (counted > 0) out.tag_term /= T(counted);

  if (polarity_logits) {
    out.polarity_term = cross_entropy(polarity_logits->data(), kNumPolarities,
                                      static_cast<int>(*gold_polarity),
                                      out.d_polarity_logits.data());
    for (T &g : out.d_polarity_logits) g *= T(weights.polarity);
  }
  out.total = T(weights.tag) * out.tag_term + T(weights.polarity) * out.polarity_term;
  return out;
}

}  // namespace uabsa

#endif  // UABSA_LOSS_H_
