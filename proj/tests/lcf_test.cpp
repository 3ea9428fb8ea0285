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

#include "lcf_properties.h"
#include "uabsa/bio.h"
#include "uabsa/lcf.h"

namespace uabsa {
namespace {

TEST(Srd, Examples) {
  EXPECT_EQ(srd(1, {1, 1}), 0);
  EXPECT_EQ(srd(5, {1, 1}), 4);
  EXPECT_EQ(srd(0, {2, 3}), 1);
  // Enumeration oracle for a single-token aspect: plain distance.
  for (int i = 0; i < 10; ++i) EXPECT_EQ(srd(i, {4, 4}), std::abs(i - 4));
}

TEST(CdmMask, Examples) {
  EXPECT_EQ(cdm_mask(3, {0, 2}, 0), (std::vector<double>{1, 1, 1}));
  EXPECT_EQ(cdm_mask(10, {1, 1}, 3), (std::vector<double>{1, 1, 1, 1, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(cdm_mask(6, {2, 2}, 6), std::vector<double>(6, 1.0));
  EXPECT_EQ(cdm_mask(6, {2, 2}, kNoLocalFocus), std::vector<double>(6, 1.0));
}

TEST(CdwWeights, Examples) {
  const auto w = cdw_weights(10, {1, 1}, 3);
  EXPECT_EQ(w[1], 1.0);
  EXPECT_EQ(w[4], 1.0);
  EXPECT_DOUBLE_EQ(w[5], 0.9);
  EXPECT_DOUBLE_EQ(w[9], 0.5);
  EXPECT_EQ(cdw_weights(7, {3, 3}, kNoLocalFocus), std::vector<double>(7, 1.0));
}

TEST(LcfWeights, FusionAveragesBothVariants) {
  const auto f = lcf_weights(10, {1, 1}, 3, LcfMode::kFusion);
  EXPECT_DOUBLE_EQ(f[0], 1.0);
  EXPECT_DOUBLE_EQ(f[5], 0.45);
  EXPECT_DOUBLE_EQ(f[9], 0.25);
}

TEST(LcfProperties, RandomTriples) {
  EXPECT_EQ(testing::lcf_properties_violation(99, 1000), "");
}

TEST(Alpha, ParseAndPrint) {
  EXPECT_EQ(parse_alpha("3"), 3);
  EXPECT_EQ(parse_alpha("inf"), kNoLocalFocus);
  EXPECT_EQ(alpha_to_string(kNoLocalFocus), "inf");
  EXPECT_THROW(parse_alpha("-1"), ConfigError);
  EXPECT_THROW(parse_alpha("3x"), ConfigError);
  EXPECT_EQ(parse_lcf_mode("CDM"), LcfMode::kCdm);
  EXPECT_EQ(parse_lcf_mode("mean"), std::nullopt);
}

TEST(DecodeBio, Examples) {
  using enum Tag;
  auto d = decode_bio({kO, kB, kO});
  EXPECT_EQ(d.spans, (std::vector<Span>{{1, 1}}));
  EXPECT_EQ(d.repairs, 0);
  d = decode_bio({kB, kI, kO, kB});
  EXPECT_EQ(d.spans, (std::vector<Span>{{0, 1}, {3, 3}}));
  d = decode_bio({kI, kO});
  EXPECT_EQ(d.spans, (std::vector<Span>{{0, 0}}));
  EXPECT_EQ(d.repairs, 1);
  d = decode_bio({kO, kI, kI, kO, kI});
  EXPECT_EQ(d.spans, (std::vector<Span>{{1, 2}, {4, 4}}));
  EXPECT_EQ(d.repairs, 2);
  EXPECT_TRUE(decode_bio({}).spans.empty());
}

}  // namespace
}  // namespace uabsa
