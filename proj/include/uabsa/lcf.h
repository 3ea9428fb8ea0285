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

#ifndef UABSA_LCF_H_
#define UABSA_LCF_H_

// Local context focus: token weights that emphasise the neighbourhood of an
// aspect span before polarity pooling.
//
// The semantic relative distance of token i to a span of length m centred at
// c = floor((start + end) / 2) is
//
//   srd(i) = max(0, |i - c| - floor(m / 2))
//
// which is zero on the span itself. With threshold alpha:
//
//   CDM  (dynamic mask)      w_i = 1 if srd <= alpha else 0
//   CDW  (dynamic weighting) w_i = 1 if srd <= alpha else 1 - (srd - alpha) / n
//   FUSION                   average of the two

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "uabsa/corpus.h"
#include "uabsa/error.h"

namespace uabsa {

enum class LcfMode : uint8_t { kCdm = 0, kCdw = 1, kFusion = 2 };

inline std::string_view to_string(LcfMode m) {
  switch (m) {
    case LcfMode::kCdm: return "cdm";
    case LcfMode::kCdw: return "cdw";
    case LcfMode::kFusion: return "fusion";
  }
  return "?";
}

inline std::optional<LcfMode> parse_lcf_mode(std::string_view s) {
  std::string lower(s);
  for (char &c : lower) c = static_cast<char>(std::tolower(c));
  if (lower == "cdm") return LcfMode::kCdm;
  if (lower == "cdw") return LcfMode::kCdw;
  if (lower == "fusion") return LcfMode::kFusion;
  return std::nullopt;
}

// A threshold at least this large disables local focus (every weight is 1).
inline constexpr int kNoLocalFocus = std::numeric_limits<int>::max();

inline int srd(int i, Span span) {
  const int center = (span.start + span.end) / 2;
  const int half = span.length() / 2;
  return std::max(0, std::abs(i - center) - half);
}

inline std::vector<double> cdm_mask(int n, Span span, int alpha) {
  std::vector<double> m(n);
  for (int i = 0; i < n; ++i) m[i] = srd(i, span) <= alpha ? 1.0 : 0.0;
  return m;
}

inline std::vector<double> cdw_weights(int n, Span span, int alpha) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    const int d = srd(i, span);
    w[i] = d <= alpha ? 1.0
                      : std::clamp(1.0 - static_cast<double>(d - alpha) / n,
                                   0.0, 1.0);
  }
  return w;
}

inline std::vector<double> lcf_weights(int n, Span span, int alpha,
                                       LcfMode mode) {
  switch (mode) {
    case LcfMode::kCdm: return cdm_mask(n, span, alpha);
    case LcfMode::kCdw: return cdw_weights(n, span, alpha);
    case LcfMode::kFusion: {
      std::vector<double> m = cdm_mask(n, span, alpha);
      std::vector<double> w = cdw_weights(n, span, alpha);
      for (int i = 0; i < n; ++i) m[i] = 0.5 * (m[i] + w[i]);
      return m;
    }
  }
  throw ConfigError("unknown LCF mode");
}

inline std::string alpha_to_string(int alpha) {
  return alpha >= kNoLocalFocus ? "inf" : std::to_string(alpha);
}

inline int parse_alpha(std::string_view s) {
  if (s == "inf" || s == "none") return kNoLocalFocus;
  try {
    size_t used = 0;
    long v = std::stol(std::string(s), &used);
    if (used != s.size() || v < 0) throw ConfigError("");
    return v >= kNoLocalFocus ? kNoLocalFocus : static_cast<int>(v);
  } catch (const std::exception &) {
    throw ConfigError("SRD threshold must be a non-negative integer or 'inf', got '" +
                      std::string(s) + "'");
  }
}

}  // namespace uabsa

#endif  // UABSA_LCF_H_
