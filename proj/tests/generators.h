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

// Random valid documents for round-trip property tests.

#ifndef UABSA_TESTS_GENERATORS_H_
#define UABSA_TESTS_GENERATORS_H_

#include <string>
#include <vector>

#include "uabsa/uabsa.h"

namespace uabsa::testing {

inline const std::vector<std::string> &word_pool() {
  static const std::vector<std::string> pool = {
      "the", "park", "trail", "was", "very", "clean", "dirty", "dog", "bench", "quiet",
      "loud", "café", "naïve", "!", ".", ",", "(", ")", "\xe2\x80\x9c", "Nice", "BIG",
      "x-ray", "42", "-999", "O", "B-ASP", "Positive"};
  return pool;
}

inline std::vector<std::string> random_tokens(Rng &rng, int min_len, int max_len) {
  const int n = min_len + static_cast<int>(rng.below(max_len - min_len + 1));
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(rng.pick(word_pool()));
  return out;
}

inline Polarity random_polarity(Rng &rng) { return kAllPolarities[rng.below(3)]; }

// A sentence with 1..3 non-overlapping aspect spans, one record per span.
inline std::vector<ApcRecord> random_apc_sentence(Rng &rng) {
  std::vector<std::string> tokens = random_tokens(rng, 1, 14);
  const int n = static_cast<int>(tokens.size());
  std::vector<Span> spans;
  int pos = static_cast<int>(rng.below(n));
  const int wanted = 1 + static_cast<int>(rng.below(3));
  while (static_cast<int>(spans.size()) < wanted && pos < n) {
    const int len = 1 + static_cast<int>(rng.below(std::min(3, n - pos)));
    spans.push_back({pos, pos + len - 1});
    pos += len + static_cast<int>(rng.below(3));
  }
  std::vector<ApcRecord> out;
  for (const Span &s : spans) out.push_back({tokens, s, random_polarity(rng)});
  return out;
}

inline std::vector<ApcRecord> random_apc_document(Rng &rng, int sentences) {
  std::vector<ApcRecord> out;
  std::vector<std::string> previous;
  for (int i = 0; i < sentences; ++i) {
    auto recs = random_apc_sentence(rng);
    // Adjacent sentences must differ or they would merge when grouped.
    if (recs.front().tokens == previous) continue;
    previous = recs.front().tokens;
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

inline std::vector<GeoAspectRecord> random_geo_records(Rng &rng, int n) {
  static const std::vector<std::string> terms = {"trail", "dog park", "trash", "Parking",
                                                 "bench \"old\"", "café, north"};
  std::vector<GeoAspectRecord> out;
  for (int i = 0; i < n; ++i) {
    GeoAspectRecord r;
    r.aspect = normalize_aspect(rng.pick(terms));
    r.polarity = random_polarity(rng);
    r.lat = -89.0 + 178.0 * rng.uniform();
    r.lon = -179.0 + 358.0 * rng.uniform();
    r.place_id = "p" + std::to_string(rng.below(1000));
    r.timestamp = static_cast<int64_t>(rng.below(2000000000));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace uabsa::testing

#endif  // UABSA_TESTS_GENERATORS_H_
