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

#ifndef UABSA_BIO_H_
#define UABSA_BIO_H_

#include <vector>

#include "uabsa/corpus.h"

namespace uabsa {

struct BioDecoding {
  std::vector<Span> spans;
  // Number of I-ASP tags that did not continue a span and were read as B-ASP.
  int repairs = 0;
};

// Tolerant decoding of possibly ill-formed model output into maximal spans.
inline BioDecoding decode_bio(const std::vector<Tag> &tags) {
  BioDecoding out;
  const int n = static_cast<int>(tags.size());
  for (int i = 0; i < n; ++i) {
    if (tags[i] == Tag::kO) continue;
    if (tags[i] == Tag::kI) ++out.repairs;
    int j = i;
    while (j + 1 < n && tags[j + 1] == Tag::kI) ++j;
    out.spans.push_back({i, j});
    i = j;
  }
  return out;
}

}  // namespace uabsa

#endif  // UABSA_BIO_H_
