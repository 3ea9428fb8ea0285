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

#ifndef UABSA_SYNTHETIC_H_
#define UABSA_SYNTHETIC_H_

// Template-generated park reviews with known aspect annotations. Used by
// the tests and the demo pipeline; sentences mix aspects of different
// polarity so that classifying an aspect needs its local context.

#include <algorithm>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "uabsa/corpus.h"
#include "uabsa/ingest.h"
#include "uabsa/io.h"
#include "uabsa/random.h"

namespace uabsa {

inline const std::vector<std::string_view> &urban_aspect_lexicon() {
  static const std::vector<std::string_view> kLexicon = {
      "trail",     "playground", "trash",      "parking",      "bench",
      "lake",      "pond",       "grass",      "trees",        "dog park",
      "picnic area", "walking path", "parking lot", "restrooms", "fountain",
      "garden",    "field",      "court",      "staff",        "view",
      "birds",     "flowers",    "paths",      "water",        "shade",
      "lighting",  "swings",     "bike lane",  "toilets",      "sculpture"};
  return kLexicon;
}

inline const std::vector<std::string_view> &polarity_cues(Polarity p) {
  static const std::vector<std::string_view> kPositive = {
      "lovely", "clean", "beautiful", "wonderful", "great",
      "peaceful", "spotless", "amazing", "pleasant", "charming"};
  static const std::vector<std::string_view> kNegative = {
      "dirty", "awful", "broken", "terrible", "smelly",
      "crowded", "muddy", "overgrown", "noisy", "unsafe"};
  static const std::vector<std::string_view> kNeutral = {
      "average", "ordinary", "typical", "standard", "okay"};
  switch (p) {
    case Polarity::kPositive: return kPositive;
    case Polarity::kNegative: return kNegative;
    case Polarity::kNeutral: return kNeutral;
  }
  return kNeutral;
}

namespace internal {

struct Clause {
  std::vector<std::string> tokens;
  Span aspect;
  Polarity polarity;
};

inline void append_words(std::vector<std::string> &out, std::string_view text) {
  for (auto &t : tokenize(text)) out.push_back(std::move(t));
}

inline Clause make_clause(Rng &rng, std::string_view aspect, Polarity pol) {
  const std::string cue(rng.pick(polarity_cues(pol)));
  static const std::vector<std::string_view> kAdverbs = {"", "really", "very", "quite",
                                                         "so"};
  const std::string adv(rng.pick(kAdverbs));
  Clause c;
  c.polarity = pol;
  auto put_aspect = [&] {
    c.aspect.start = static_cast<int>(c.tokens.size());
    append_words(c.tokens, aspect);
    c.aspect.end = static_cast<int>(c.tokens.size()) - 1;
  };
  switch (rng.below(5)) {
    case 0:  // the A is [adv] C
      append_words(c.tokens, "the");
      put_aspect();
      append_words(c.tokens, rng.bernoulli(0.5) ? "is" : "was");
      append_words(c.tokens, adv);
      append_words(c.tokens, cue);
      break;
    case 1:  // a [adv] C A
      append_words(c.tokens, "a");
      append_words(c.tokens, adv);
      append_words(c.tokens, cue);
      put_aspect();
      break;
    case 2:  // we found the A [adv] C
      append_words(c.tokens, rng.bernoulli(0.5) ? "we found the" : "i thought the");
      put_aspect();
      append_words(c.tokens, adv);
      append_words(c.tokens, cue);
      break;
    case 3:  // the A looks C
      append_words(c.tokens, "the");
      put_aspect();
      append_words(c.tokens, rng.bernoulli(0.5) ? "looks" : "seemed");
      append_words(c.tokens, cue);
      break;
    default:  // C A here
      append_words(c.tokens, cue);
      put_aspect();
      append_words(c.tokens, rng.bernoulli(0.5) ? "here" : "overall");
      break;
  }
  return c;
}

}  // namespace internal

// n_sentences sentences, each with 1-3 distinct aspects; one APC record per
// aspect, records of a sentence contiguous.
inline std::vector<ApcRecord> synthetic_apc_corpus(int n_sentences, uint64_t seed) {
  Rng rng(seed);
  const auto &lexicon = urban_aspect_lexicon();
  static const std::vector<std::string_view> kPrefixes = {
      "", "", "honestly ,", "overall", "when we visited ,", "on sunday"};
  static const std::vector<std::string_view> kJoiners = {", and", "but", ";", ", while",
                                                         ". also"};
  static const std::vector<std::string_view> kSuffixes = {
      "", "", "for families", "in the summer", "with kids", "."};
  std::vector<ApcRecord> out;
  std::unordered_set<std::string> seen;
  while (static_cast<int>(seen.size()) < n_sentences) {
    const int n_aspects = 1 + static_cast<int>(rng.below(3));
    std::vector<std::string_view> aspects;
    while (static_cast<int>(aspects.size()) < n_aspects) {
      std::string_view a = rng.pick(lexicon);
      if (std::find(aspects.begin(), aspects.end(), a) == aspects.end()) {
        aspects.push_back(a);
      }
    }
    std::vector<std::string> tokens;
    internal::append_words(tokens, rng.pick(kPrefixes));
    std::vector<std::pair<Span, Polarity>> labels;
    for (size_t k = 0; k < aspects.size(); ++k) {
      if (k > 0) internal::append_words(tokens, rng.pick(kJoiners));
      const double u = rng.uniform();
      const Polarity pol = u < 0.45   ? Polarity::kPositive
                           : u < 0.8  ? Polarity::kNegative
                                      : Polarity::kNeutral;
      internal::Clause c = internal::make_clause(rng, aspects[k], pol);
      const int off = static_cast<int>(tokens.size());
      tokens.insert(tokens.end(), c.tokens.begin(), c.tokens.end());
      labels.push_back({{c.aspect.start + off, c.aspect.end + off}, pol});
    }
    internal::append_words(tokens, rng.pick(kSuffixes));
    if (!seen.insert(join(tokens)).second) continue;
    for (const auto &[span, pol] : labels) out.push_back({tokens, span, pol});
  }
  return out;
}

// Review-like text: the token sequence of a synthetic sentence.
inline std::vector<std::string> synthetic_review_texts(int n, uint64_t seed) {
  std::vector<std::string> out;
  const auto records = synthetic_apc_corpus(n, seed);
  for (size_t i = 0; i < records.size(); ++i) {
    if (i > 0 && records[i].tokens == records[i - 1].tokens) continue;
    out.push_back(join(records[i].tokens));
  }
  return out;
}

struct FixtureSummary {
  int centers = 0;
  int unique_places = 0;
  int reviews_written = 0;
};

// Writes a fixture directory for grid: places_per_center places around each
// center (each center also re-lists one place of the previous center, so
// de-duplication is exercised), raw_reviews_per_place reviews per place
// and nearby results paginated 20 per page.
inline FixtureSummary write_synthetic_fixtures(const std::filesystem::path &dir,
                                               const QueryGrid &grid, int places_per_center,
                                               int raw_reviews_per_place, uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "nearby");
  fs::create_directories(dir / "details");
  const auto write = internal::write_file;
  Rng rng(seed);
  const std::vector<LatLon> centers = plan_grid(grid);
  const int total_places = static_cast<int>(centers.size()) * places_per_center;
  const std::vector<std::string> texts =
      synthetic_review_texts(std::max(1, total_places * raw_reviews_per_place), seed + 1);
  FixtureSummary summary;
  summary.centers = static_cast<int>(centers.size());
  nlohmann::ordered_json previous_first;
  size_t next_text = 0;
  const double deg = grid.radius_m / (kEarthRadiusM * M_PI / 180.0);
  for (size_t k = 0; k < centers.size(); ++k) {
    nlohmann::ordered_json results = nlohmann::ordered_json::array();
    for (int j = 0; j < places_per_center; ++j) {
      char id[64];
      std::snprintf(id, sizeof id, "fx%04zu_%03d", k, j);
      const double lat = centers[k].lat + (rng.uniform() - 0.5) * deg;
      const double lon = centers[k].lon + (rng.uniform() - 0.5) * deg;
      nlohmann::ordered_json place;
      place["place_id"] = id;
      place["name"] = "Park " + std::string(id);
      place["geometry"] = {{"location", {{"lat", lat}, {"lng", lon}}}};
      place["rating"] = 1.0 + static_cast<double>(rng.below(41)) / 10.0;
      place["user_ratings_total"] = static_cast<int64_t>(10 + rng.below(500));
      results.push_back(place);
      ++summary.unique_places;

      nlohmann::ordered_json reviews = nlohmann::ordered_json::array();
      for (int r = 0; r < raw_reviews_per_place; ++r) {
        nlohmann::ordered_json rev;
        rev["author_name"] = "visitor " + std::to_string(rng.below(10000));
        rev["language"] = "en";
        rev["rating"] = static_cast<int>(1 + rng.below(5));
        rev["text"] = texts[next_text++ % texts.size()];
        rev["time"] = static_cast<int64_t>(1600000000 + rng.below(100000000));
        reviews.push_back(std::move(rev));
      }
      nlohmann::ordered_json details;
      details["result"] = {{"place_id", id}, {"reviews", reviews}};
      details["status"] = "OK";
      write(dir / "details" / (std::string(id) + ".json"), details.dump(2) + "\n");
      summary.reviews_written += std::min(raw_reviews_per_place, kMaxReviewsPerPlace);
    }
    if (!previous_first.is_null()) {
      nlohmann::ordered_json dup = previous_first;
      dup["user_ratings_total"] = dup["user_ratings_total"].get<int64_t>() + 1;
      results.push_back(std::move(dup));
    }
    if (!results.empty()) previous_first = results[0];

    const std::string hash = center_hash(centers[k]);
    for (size_t page = 0, begin = 0; begin < results.size() || page == 0; ++page, begin += 20) {
      nlohmann::ordered_json body;
      const size_t end = std::min(results.size(), begin + 20);
      body["results"] = nlohmann::ordered_json::array();
      for (size_t i = begin; i < end; ++i) body["results"].push_back(results[i]);
      body["status"] = results.empty() ? "ZERO_RESULTS" : "OK";
      const std::string name = page == 0 ? hash : hash + "-p" + std::to_string(page + 1);
      if (end < results.size()) body["next_page_token"] = hash + "-p" + std::to_string(page + 2);
      write(dir / "nearby" / (name + ".json"), body.dump(2) + "\n");
      if (end >= results.size()) break;
    }
  }
  return summary;
}

}  // namespace uabsa

#endif  // UABSA_SYNTHETIC_H_
