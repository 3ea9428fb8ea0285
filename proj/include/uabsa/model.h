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

#ifndef UABSA_MODEL_H_
#define UABSA_MODEL_H_

// Word-level transformer encoder with two heads sharing one encoder pass:
//
//   ids -> token + position embeddings -> N x pre-norm encoder layer
//       -> final layer norm -> states H (n x d)
//   tag head:      H W_tag + b_tag                       (n x 3: O, B, I)
//   polarity head: (1/n) sum_i w_i H_i W_pol + b_pol     (3: Pos, Neg, Neu)
//
// where w are the local-context-focus weights of the focused aspect span.
// Backpropagation is written out by hand; gradients are verified against
// finite differences in the tests.

#include <array>
#include <atomic>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "uabsa/bio.h"
#include "uabsa/corpus.h"
#include "uabsa/error.h"
#include "uabsa/lcf.h"
#include "uabsa/random.h"
#include "uabsa/tensor.h"

namespace uabsa {

struct ModelConfig {
  int vocab_size = 2;
  int d_model = 64;
  int n_heads = 4;
  int n_layers = 2;
  // Hidden width of the feed-forward block; 0 selects 2 * d_model.
  int ffn_dim = 0;
  int max_len = 128;
  int srd_threshold = 3;
  LcfMode lcf_mode = LcfMode::kCdw;
  double dropout = 0.1;
  uint64_t seed = 42;

  int ffn() const { return ffn_dim > 0 ? ffn_dim : 2 * d_model; }

  void validate() const {
    if (vocab_size < 2) throw ConfigError("vocab_size must be >= 2");
    if (d_model <= 0 || n_heads <= 0 || n_layers <= 0 || max_len <= 0) {
      throw ConfigError("d_model, n_heads, n_layers and max_len must be positive");
    }
    if (d_model % n_heads != 0) {
      throw ConfigError("d_model (" + std::to_string(d_model) +
                        ") must be divisible by n_heads (" +
                        std::to_string(n_heads) + ")");
    }
    if (ffn_dim < 0) throw ConfigError("ffn_dim must be >= 0");
    if (srd_threshold < 0) throw ConfigError("srd_threshold must be >= 0");
    if (!(dropout >= 0.0 && dropout < 1.0)) {
      throw ConfigError("dropout must be in [0, 1)");
    }
  }
};

// Word vocabulary. Ids 0 and 1 are reserved for padding and unknown words;
// lookups are ASCII case-insensitive.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() {
    add("<pad>");
    add("<unk>");
  }

  static std::string normalize(std::string_view token) {
    std::string s(token);
    for (char &c : s) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return s;
  }

  // Built from training sentences only, in first-seen order.
  static Vocabulary build(const std::vector<AtepcSentence> &sentences) {
    Vocabulary v;
    for (const AtepcSentence &s : sentences) {
      for (const std::string &t : s.tokens) v.add(t);
    }
    return v;
  }

  int add(std::string_view token) {
    std::string key = normalize(token);
    auto it = index_.find(key);
    if (it != index_.end()) return it->second;
    const int id = size();
    index_.emplace(key, id);
    tokens_.push_back(std::move(key));
    return id;
  }

  int id(std::string_view token) const {
    auto it = index_.find(normalize(token));
    return it == index_.end() ? kUnk : it->second;
  }

  std::vector<int> encode(const std::vector<std::string> &tokens) const {
    std::vector<int> ids;
    ids.reserve(tokens.size());
    for (const std::string &t : tokens) ids.push_back(id(t));
    return ids;
  }

  const std::string &token(int id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  int size() const { return static_cast<int>(tokens_.size()); }

  // One token per line; the line index is the id.
  std::string to_text() const {
    std::string out;
    for (const std::string &t : tokens_) {
      out += t;
      out += '\n';
    }
    return out;
  }

  static Vocabulary from_tokens(const std::vector<std::string> &tokens) {
    if (tokens.size() < 2 || tokens[0] != "<pad>" || tokens[1] != "<unk>") {
      throw ParseError("vocabulary must start with <pad> and <unk>");
    }
    Vocabulary v;
    for (size_t i = 2; i < tokens.size(); ++i) {
      if (v.add(tokens[i]) != static_cast<int>(i)) {
        throw ParseError("duplicate vocabulary entry '" + tokens[i] + "'",
                         static_cast<int>(i) + 1);
      }
    }
    return v;
  }

  static Vocabulary from_text(std::string_view text) {
    std::vector<std::string> tokens;
    for (const auto &line : internal::split_lines(text)) {
      if (line.text.empty()) continue;
      tokens.emplace_back(line.text);
    }
    return from_tokens(tokens);
  }

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

template <typename T>
struct EncoderLayerParams {
  Matrix<T> ln1_gamma, ln1_beta;
  Matrix<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix<T> ln2_gamma, ln2_beta;
  Matrix<T> w1, b1, w2, b2;
};

// All trainable tensors. The visit order is the checkpoint order.
template <typename T>
struct Parameters {
  Matrix<T> token_embedding;
  Matrix<T> position_embedding;
  std::vector<EncoderLayerParams<T>> layers;
  Matrix<T> final_gamma, final_beta;
  Matrix<T> tag_w, tag_b;
  Matrix<T> polarity_w, polarity_b;

  // Zero-filled tensors with the shapes implied by cfg.
  static Parameters shaped(const ModelConfig &cfg) {
    const int d = cfg.d_model, f = cfg.ffn();
    Parameters p;
    p.token_embedding.resize(cfg.vocab_size, d);
    p.position_embedding.resize(cfg.max_len, d);
    p.layers.resize(cfg.n_layers);
    for (auto &l : p.layers) {
      l.ln1_gamma.resize(1, d);
      l.ln1_beta.resize(1, d);
      l.wq.resize(d, d);
      l.bq.resize(1, d);
      l.wk.resize(d, d);
      l.bk.resize(1, d);
      l.wv.resize(d, d);
      l.bv.resize(1, d);
      l.wo.resize(d, d);
      l.bo.resize(1, d);
      l.ln2_gamma.resize(1, d);
      l.ln2_beta.resize(1, d);
      l.w1.resize(d, f);
      l.b1.resize(1, f);
      l.w2.resize(f, d);
      l.b2.resize(1, d);
    }
    p.final_gamma.resize(1, d);
    p.final_beta.resize(1, d);
    p.tag_w.resize(d, kNumTags);
    p.tag_b.resize(1, kNumTags);
    p.polarity_w.resize(d, kNumPolarities);
    p.polarity_b.resize(1, kNumPolarities);
    return p;
  }

  template <typename F>
  void visit(F &&f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F &&f) const {
    visit_impl(*this, f);
  }

  std::vector<Matrix<T> *> tensors() {
    std::vector<Matrix<T> *> out;
    visit([&](const std::string &, Matrix<T> &m) { out.push_back(&m); });
    return out;
  }
  std::vector<const Matrix<T> *> tensors() const {
    std::vector<const Matrix<T> *> out;
    visit([&](const std::string &, const Matrix<T> &m) { out.push_back(&m); });
    return out;
  }
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    visit([&](const std::string &n, const Matrix<T> &) { out.push_back(n); });
    return out;
  }

  size_t count() const {
    size_t n = 0;
    for (const Matrix<T> *m : tensors()) n += m->size();
    return n;
  }

  void set_zero() {
    for (Matrix<T> *m : tensors()) m->set_zero();
  }

  bool all_finite() const {
    for (const Matrix<T> *m : tensors()) {
      if (!uabsa::all_finite(*m)) return false;
    }
    return true;
  }

  friend bool operator==(const Parameters &a, const Parameters &b) {
    auto ta = a.tensors();
    auto tb = b.tensors();
    if (ta.size() != tb.size()) return false;
    for (size_t i = 0; i < ta.size(); ++i) {
      if (!(*ta[i] == *tb[i])) return false;
    }
    return true;
  }

 private:
  template <typename Self, typename F>
  static void visit_impl(Self &self, F &f) {
    f("token_embedding", self.token_embedding);
    f("position_embedding", self.position_embedding);
    for (size_t i = 0; i < self.layers.size(); ++i) {
      auto &l = self.layers[i];
      const std::string p = "layers." + std::to_string(i) + ".";
      f(p + "ln1_gamma", l.ln1_gamma);
      f(p + "ln1_beta", l.ln1_beta);
      f(p + "wq", l.wq);
      f(p + "bq", l.bq);
      f(p + "wk", l.wk);
      f(p + "bk", l.bk);
      f(p + "wv", l.wv);
      f(p + "bv", l.bv);
      f(p + "wo", l.wo);
      f(p + "bo", l.bo);
      f(p + "ln2_gamma", l.ln2_gamma);
      f(p + "ln2_beta", l.ln2_beta);
      f(p + "w1", l.w1);
      f(p + "b1", l.b1);
      f(p + "w2", l.w2);
      f(p + "b2", l.b2);
    }
    f("final_gamma", self.final_gamma);
    f("final_beta", self.final_beta);
    f("tag_w", self.tag_w);
    f("tag_b", self.tag_b);
    f("polarity_w", self.polarity_w);
    f("polarity_b", self.polarity_b);
  }
};

// Intermediate values of one encoder pass, kept for backpropagation.
template <typename T>
struct LayerTrace {
  Matrix<T> input;
  LayerNormCache<T> ln1;
  Matrix<T> a, q, k, v;
  std::vector<Matrix<T>> probs;  // per head, n x n
  Matrix<T> ctx;
  std::vector<T> drop1;
  Matrix<T> x1;
  LayerNormCache<T> ln2;
  Matrix<T> b, u, g;
  std::vector<T> drop2;
};

template <typename T>
struct EncoderTrace {
  std::vector<int> ids;
  std::vector<T> drop_embed;
  std::vector<LayerTrace<T>> layers;
  Matrix<T> last;
  LayerNormCache<T> final_ln;
  Matrix<T> states;
};

template <typename T>
struct ForwardOutput {
  Matrix<T> tag_logits;
  std::optional<std::array<T, kNumPolarities>> polarity_logits;
};

struct AspectPrediction {
  std::string term;
  Span span;
  Polarity polarity = Polarity::kNeutral;
  double confidence = 0.0;
};

template <typename T>
class LcfModel {
 public:
  LcfModel(ModelConfig cfg, Vocabulary vocab)
      : cfg_(cfg), vocab_(std::move(vocab)) {
    cfg_.vocab_size = vocab_.size();
    cfg_.validate();
    params_ = Parameters<T>::shaped(cfg_);
    initialize();
  }

  LcfModel(ModelConfig cfg, Vocabulary vocab, Parameters<T> params)
      : cfg_(cfg), vocab_(std::move(vocab)), params_(std::move(params)) {
    cfg_.validate();
    if (cfg_.vocab_size != vocab_.size()) {
      throw ConfigError("vocabulary size does not match model config");
    }
    const Parameters<T> expected = Parameters<T>::shaped(cfg_);
    auto want = expected.tensors();
    auto have = params_.tensors();
    for (size_t i = 0; i < want.size(); ++i) {
      if (want[i]->rows() != have[i]->rows() || want[i]->cols() != have[i]->cols()) {
        throw ConfigError("parameter shapes do not match model config");
      }
    }
  }

  LcfModel(const LcfModel &o)
      : cfg_(o.cfg_), vocab_(o.vocab_), params_(o.params_) {}
  LcfModel &operator=(const LcfModel &o) {
    cfg_ = o.cfg_;
    vocab_ = o.vocab_;
    params_ = o.params_;
    return *this;
  }

  const ModelConfig &config() const { return cfg_; }
  ModelConfig &mutable_config() { return cfg_; }
  const Vocabulary &vocab() const { return vocab_; }
  Parameters<T> &params() { return params_; }
  const Parameters<T> &params() const { return params_; }

  uint64_t encoder_passes() const { return encoder_passes_.load(); }

  // Runs the encoder once. With a dropout generator the pass is in training
  // mode; with a trace the intermediates needed by backward() are recorded.
  Matrix<T> encode(std::span<const int> ids, EncoderTrace<T> *trace = nullptr,
                   Rng *dropout_rng = nullptr) const {
    const int n = static_cast<int>(ids.size());
    const int d = cfg_.d_model;
    check_length(n);
    encoder_passes_.fetch_add(1);
    const bool train = dropout_rng != nullptr && cfg_.dropout > 0.0;

    EncoderTrace<T> local;
    EncoderTrace<T> &tr = trace ? *trace : local;
    tr.ids.assign(ids.begin(), ids.end());
    tr.layers.assign(cfg_.n_layers, {});

    Matrix<T> x(n, d);
    for (int i = 0; i < n; ++i) {
      const int id = ids[i];
      if (id < 0 || id >= cfg_.vocab_size) throw ConfigError("token id out of range");
      const T *e = params_.token_embedding.row(id);
      const T *p = params_.position_embedding.row(i);
      T *xr = x.row(i);
      for (int c = 0; c < d; ++c) xr[c] = e[c] + p[c];
    }
    tr.drop_embed.clear();
    if (train) apply_dropout(x, tr.drop_embed, *dropout_rng);

    for (int l = 0; l < cfg_.n_layers; ++l) {
      layer_forward(params_.layers[l], x, tr.layers[l], train ? dropout_rng : nullptr);
    }
    tr.last = x;
    Matrix<T> states;
    layer_norm(x, params_.final_gamma, params_.final_beta, states, &tr.final_ln);
    if (trace) trace->states = states;
    return states;
  }

  Matrix<T> tag_logits(const Matrix<T> &states) const {
    Matrix<T> logits;
    matmul(states, params_.tag_w, logits);
    add_row_bias(logits, params_.tag_b);
    return logits;
  }

  std::vector<T> focus_weights(int n, Span span) const {
    std::vector<double> w = lcf_weights(n, span, cfg_.srd_threshold, cfg_.lcf_mode);
    return std::vector<T>(w.begin(), w.end());
  }

  // Mean over positions of the focus-weighted states.
  Matrix<T> pooled(const Matrix<T> &states, Span span) const {
    const int n = states.rows(), d = states.cols();
    check_span(n, span);
    const std::vector<T> w = focus_weights(n, span);
    Matrix<T> out(1, d);
    for (int i = 0; i < n; ++i) {
      if (w[i] == T(0)) continue;
      const T s = w[i] / T(n);
      const T *h = states.row(i);
      for (int c = 0; c < d; ++c) out(0, c) += s * h[c];
    }
    return out;
  }

  std::array<T, kNumPolarities> polarity_logits(const Matrix<T> &states,
                                                Span span) const {
    Matrix<T> logits;
    matmul(pooled(states, span), params_.polarity_w, logits);
    add_row_bias(logits, params_.polarity_b);
    std::array<T, kNumPolarities> out{};
    for (int k = 0; k < kNumPolarities; ++k) out[k] = logits(0, k);
    return out;
  }

  // Both heads from a single encoder pass (inference mode).
  ForwardOutput<T> forward(std::span<const int> ids,
                           std::optional<Span> focused = std::nullopt) const {
    if (focused) check_span(static_cast<int>(ids.size()), *focused);
    ForwardOutput<T> out;
    Matrix<T> states = encode(ids);
    out.tag_logits = tag_logits(states);
    if (focused) out.polarity_logits = polarity_logits(states, *focused);
    return out;
  }

  // Accumulates into grads the gradient of a loss whose derivatives with
  // respect to the tag logits (and, with a span, the polarity logits) are
  // given.
  void backward(const EncoderTrace<T> &tr, const Matrix<T> &d_tag_logits,
                std::optional<Span> focused,
                const std::array<T, kNumPolarities> *d_polarity,
                Parameters<T> &grads) const {
    const Matrix<T> &states = tr.states;
    const int n = states.rows(), d = cfg_.d_model;

    Matrix<T> d_states;
    matmul_a_bt(d_tag_logits, params_.tag_w, d_states);
    matmul_at_b(states, d_tag_logits, grads.tag_w, true);
    accumulate_col_sums(d_tag_logits, grads.tag_b);

    if (focused && d_polarity) {
      Matrix<T> dlog(1, kNumPolarities);
      for (int k = 0; k < kNumPolarities; ++k) dlog(0, k) = (*d_polarity)[k];
      Matrix<T> pool = pooled(states, *focused);
      matmul_at_b(pool, dlog, grads.polarity_w, true);
      accumulate_col_sums(dlog, grads.polarity_b);
      Matrix<T> dpool;
      matmul_a_bt(dlog, params_.polarity_w, dpool);
      const std::vector<T> w = focus_weights(n, *focused);
      for (int i = 0; i < n; ++i) {
        const T s = w[i] / T(n);
        T *dr = d_states.row(i);
        for (int c = 0; c < d; ++c) dr[c] += s * dpool(0, c);
      }
    }

    Matrix<T> dx;
    layer_norm_backward(d_states, tr.final_ln, params_.final_gamma,
                        grads.final_gamma, grads.final_beta, dx, false);
    for (int l = cfg_.n_layers - 1; l >= 0; --l) {
      layer_backward(params_.layers[l], tr.layers[l], dx, grads.layers[l]);
    }
    if (!tr.drop_embed.empty()) scale_rows(dx, tr.drop_embed);
    for (int i = 0; i < n; ++i) {
      T *ge = grads.token_embedding.row(tr.ids[i]);
      T *gp = grads.position_embedding.row(i);
      const T *g = dx.row(i);
      for (int c = 0; c < d; ++c) {
        ge[c] += g[c];
        gp[c] += g[c];
      }
    }
  }

  // Tags then classifies every extracted aspect of a review. Reviews longer
  // than max_len are processed in consecutive windows.
  std::vector<AspectPrediction> predict(std::string_view text) const {
    return predict_tokens(tokenize(text));
  }

  std::vector<AspectPrediction> predict_tokens(
      const std::vector<std::string> &tokens) const {
    std::vector<AspectPrediction> out;
    const int total = static_cast<int>(tokens.size());
    for (int begin = 0; begin < total; begin += cfg_.max_len) {
      const int end = std::min(total, begin + cfg_.max_len);
      std::vector<std::string> window(tokens.begin() + begin, tokens.begin() + end);
      const std::vector<int> ids = vocab_.encode(window);
      const Matrix<T> states = encode(ids);
      const Matrix<T> logits = tag_logits(states);
      std::vector<Tag> tags(ids.size());
      for (int i = 0; i < logits.rows(); ++i) {
        tags[i] = static_cast<Tag>(argmax(logits.row(i), kNumTags));
      }
      for (const Span &span : decode_bio(tags).spans) {
        auto pl = polarity_logits(states, span);
        softmax_inplace(pl.data(), kNumPolarities);
        const int best = argmax(pl.data(), kNumPolarities);
        AspectPrediction p;
        p.term = join(window, span.start, span.end + 1);
        p.span = {span.start + begin, span.end + begin};
        p.polarity = static_cast<Polarity>(best);
        p.confidence = static_cast<double>(pl[best]);
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  // Gold-free helpers used by evaluation.
  std::vector<Tag> tag(const std::vector<std::string> &tokens) const {
    const Matrix<T> logits = tag_logits(encode(vocab_.encode(tokens)));
    std::vector<Tag> tags(tokens.size());
    for (int i = 0; i < logits.rows(); ++i) {
      tags[i] = static_cast<Tag>(argmax(logits.row(i), kNumTags));
    }
    return tags;
  }

  Polarity classify(const std::vector<std::string> &tokens, Span span) const {
    auto pl = polarity_logits(encode(vocab_.encode(tokens)), span);
    return static_cast<Polarity>(argmax(pl.data(), kNumPolarities));
  }

 private:
  void check_length(int n) const {
    if (n > cfg_.max_len) {
      throw ConfigError("input of " + std::to_string(n) +
                        " tokens exceeds max_len " + std::to_string(cfg_.max_len));
    }
  }

  static void check_span(int n, Span span) {
    if (!span.valid_for(n)) {
      std::ostringstream os;
      os << "aspect span " << span << " out of range for " << n << " tokens";
      throw ConfigError(os.str());
    }
  }

  void initialize() {
    Rng rng(cfg_.seed);
    auto fill_normal = [&](Matrix<T> &m, double stddev) {
      for (T &v : m.values()) v = static_cast<T>(rng.normal() * stddev);
    };
    auto fill_ones = [](Matrix<T> &m) {
      for (T &v : m.values()) v = T(1);
    };
    const double d = cfg_.d_model;
    fill_normal(params_.token_embedding, 1.0 / std::sqrt(d));
    fill_normal(params_.position_embedding, 0.1 / std::sqrt(d));
    for (auto &l : params_.layers) {
      fill_ones(l.ln1_gamma);
      fill_ones(l.ln2_gamma);
      fill_normal(l.wq, 1.0 / std::sqrt(d));
      fill_normal(l.wk, 1.0 / std::sqrt(d));
      fill_normal(l.wv, 1.0 / std::sqrt(d));
      fill_normal(l.wo, 1.0 / std::sqrt(d * 2 * cfg_.n_layers));
      fill_normal(l.w1, 1.0 / std::sqrt(d));
      fill_normal(l.w2, 1.0 / std::sqrt(cfg_.ffn() * 2.0 * cfg_.n_layers));
    }
    fill_ones(params_.final_gamma);
    fill_normal(params_.tag_w, 1.0 / std::sqrt(d));
    fill_normal(params_.polarity_w, 1.0 / std::sqrt(d));
  }

  // Inverted dropout; mask holds 0 or 1/(1-p) per element.
  void apply_dropout(Matrix<T> &x, std::vector<T> &mask, Rng &rng) const {
    const T scale = T(1.0 / (1.0 - cfg_.dropout));
    mask.resize(x.size());
    auto xv = x.values();
    for (size_t i = 0; i < xv.size(); ++i) {
      mask[i] = rng.bernoulli(cfg_.dropout) ? T(0) : scale;
      xv[i] *= mask[i];
    }
  }

  static void scale_rows(Matrix<T> &x, const std::vector<T> &mask) {
    auto xv = x.values();
    for (size_t i = 0; i < xv.size(); ++i) xv[i] *= mask[i];
  }

  void layer_forward(const EncoderLayerParams<T> &p, Matrix<T> &x,
                     LayerTrace<T> &tr, Rng *rng) const {
    const int n = x.rows(), d = cfg_.d_model, h = cfg_.n_heads, dk = d / h;
    const T inv_sqrt = T(1) / std::sqrt(T(dk));
    tr.input = x;
    layer_norm(x, p.ln1_gamma, p.ln1_beta, tr.a, &tr.ln1);
    matmul(tr.a, p.wq, tr.q);
    add_row_bias(tr.q, p.bq);
    matmul(tr.a, p.wk, tr.k);
    add_row_bias(tr.k, p.bk);
    matmul(tr.a, p.wv, tr.v);
    add_row_bias(tr.v, p.bv);

    tr.probs.assign(h, Matrix<T>(n, n));
    tr.ctx.resize(n, d);
    for (int head = 0; head < h; ++head) {
      const int off = head * dk;
      Matrix<T> &P = tr.probs[head];
      for (int i = 0; i < n; ++i) {
        const T *qi = tr.q.row(i) + off;
        T *pr = P.row(i);
        for (int j = 0; j < n; ++j) {
          const T *kj = tr.k.row(j) + off;
          T s = 0;
          for (int c = 0; c < dk; ++c) s += qi[c] * kj[c];
          pr[j] = s * inv_sqrt;
        }
        softmax_inplace(pr, n);
        T *ci = tr.ctx.row(i) + off;
        for (int j = 0; j < n; ++j) {
          const T pij = pr[j];
          const T *vj = tr.v.row(j) + off;
          for (int c = 0; c < dk; ++c) ci[c] += pij * vj[c];
        }
      }
    }
    Matrix<T> attn;
    matmul(tr.ctx, p.wo, attn);
    add_row_bias(attn, p.bo);
    tr.drop1.clear();
    if (rng) apply_dropout(attn, tr.drop1, *rng);
    add_inplace(attn, x);
    tr.x1 = std::move(attn);

    layer_norm(tr.x1, p.ln2_gamma, p.ln2_beta, tr.b, &tr.ln2);
    matmul(tr.b, p.w1, tr.u);
    add_row_bias(tr.u, p.b1);
    tr.g = tr.u;
    for (T &v : tr.g.values()) v = gelu(v);
    Matrix<T> m;
    matmul(tr.g, p.w2, m);
    add_row_bias(m, p.b2);
    tr.drop2.clear();
    if (rng) apply_dropout(m, tr.drop2, *rng);
    add_inplace(m, tr.x1);
    x = std::move(m);
  }

  // dx: gradient w.r.t. the layer output on entry, w.r.t. its input on exit.
  void layer_backward(const EncoderLayerParams<T> &p, const LayerTrace<T> &tr,
                      Matrix<T> &dx, EncoderLayerParams<T> &g) const {
    const int n = dx.rows(), d = cfg_.d_model, h = cfg_.n_heads, dk = d / h;
    const T inv_sqrt = T(1) / std::sqrt(T(dk));

    // Feed-forward block.
    Matrix<T> dm = dx;
    if (!tr.drop2.empty()) scale_rows(dm, tr.drop2);
    matmul_at_b(tr.g, dm, g.w2, true);
    accumulate_col_sums(dm, g.b2);
    Matrix<T> du;
    matmul_a_bt(dm, p.w2, du);
    auto duv = du.values();
    auto uv = tr.u.values();
    for (size_t i = 0; i < duv.size(); ++i) duv[i] *= gelu_grad(uv[i]);
    matmul_at_b(tr.b, du, g.w1, true);
    accumulate_col_sums(du, g.b1);
    Matrix<T> db;
    matmul_a_bt(du, p.w1, db);
    layer_norm_backward(db, tr.ln2, p.ln2_gamma, g.ln2_gamma, g.ln2_beta, dx, true);

    // Attention block.
    Matrix<T> dattn = dx;
    if (!tr.drop1.empty()) scale_rows(dattn, tr.drop1);
    matmul_at_b(tr.ctx, dattn, g.wo, true);
    accumulate_col_sums(dattn, g.bo);
    Matrix<T> dctx;
    matmul_a_bt(dattn, p.wo, dctx);

    Matrix<T> dq(n, d), dk_(n, d), dv(n, d);
    std::vector<T> dP(n);
    for (int head = 0; head < h; ++head) {
      const int off = head * dk;
      const Matrix<T> &P = tr.probs[head];
      for (int i = 0; i < n; ++i) {
        const T *dci = dctx.row(i) + off;
        const T *pr = P.row(i);
        T dot = 0;
        for (int j = 0; j < n; ++j) {
          const T *vj = tr.v.row(j) + off;
          T s = 0;
          for (int c = 0; c < dk; ++c) s += dci[c] * vj[c];
          dP[j] = s;
          dot += s * pr[j];
          T *dvj = dv.row(j) + off;
          for (int c = 0; c < dk; ++c) dvj[c] += pr[j] * dci[c];
        }
        const T *qi = tr.q.row(i) + off;
        T *dqi = dq.row(i) + off;
        for (int j = 0; j < n; ++j) {
          const T ds = pr[j] * (dP[j] - dot) * inv_sqrt;
          if (ds == T(0)) continue;
          const T *kj = tr.k.row(j) + off;
          T *dkj = dk_.row(j) + off;
          for (int c = 0; c < dk; ++c) {
            dqi[c] += ds * kj[c];
            dkj[c] += ds * qi[c];
          }
        }
      }
    }
    matmul_at_b(tr.a, dq, g.wq, true);
    accumulate_col_sums(dq, g.bq);
    matmul_at_b(tr.a, dk_, g.wk, true);
    accumulate_col_sums(dk_, g.bk);
    matmul_at_b(tr.a, dv, g.wv, true);
    accumulate_col_sums(dv, g.bv);
    Matrix<T> da;
    matmul_a_bt(dq, p.wq, da);
    matmul_a_bt(dk_, p.wk, da, true);
    matmul_a_bt(dv, p.wv, da, true);
    layer_norm_backward(da, tr.ln1, p.ln1_gamma, g.ln1_gamma, g.ln1_beta, dx, true);
  }

  ModelConfig cfg_;
  Vocabulary vocab_;
  Parameters<T> params_;
  mutable std::atomic<uint64_t> encoder_passes_{0};
};

}  // namespace uabsa

#endif  // UABSA_MODEL_H_
