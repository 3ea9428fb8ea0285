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

#include <filesystem>
#include <fstream>
#include <set>

#include "uabsa/ingest.h"
#include "uabsa/io.h"
#include "uabsa/synthetic.h"

namespace uabsa {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class FixtureDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("uabsa_ingest_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_ / "nearby");
    fs::create_directories(dir_ / "details");
  }
  void TearDown() override { fs::remove_all(dir_); }

  void write(const fs::path &rel, const json &j) {
    std::ofstream(dir_ / rel) << j.dump(2);
  }
  static json place(const std::string &id, double lat, double lon, int total) {
    return {{"place_id", id}, {"name", "Park " + id},
            {"geometry", {{"location", {{"lat", lat}, {"lng", lon}}}}},
            {"rating", 4.5}, {"user_ratings_total", total}};
  }
  void details(const std::string &id, int n_reviews) {
    json reviews = json::array();
    for (int i = 0; i < n_reviews; ++i) {
      reviews.push_back({{"author_name", "a" + std::to_string(i)}, {"language", "en"},
                         {"rating", 1 + i % 5}, {"text", "review " + std::to_string(i)},
                         {"time", 1700000000 + i}});
    }
    write(fs::path("details") / (id + ".json"),
          {{"status", "OK"}, {"result", {{"place_id", id}, {"reviews", reviews}}}});
  }

  fs::path dir_;
};

QueryGrid two_by_one() {
  QueryGrid g;
  g.rows = 1;
  g.cols = 2;
  return g;
}

TEST(PlanGrid, Examples) {
  QueryGrid g;
  const auto one = plan_grid(g);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], (LatLon{42.36, -71.06}));
  g.rows = g.cols = 2;
  const auto four = plan_grid(g);
  ASSERT_EQ(four.size(), 4u);
  EXPECT_EQ(std::set<std::string>({center_key(four[0]), center_key(four[1]),
                                   center_key(four[2]), center_key(four[3])})
                .size(),
            4u);
  // Row-major: [0]-[1] and [2]-[3] are east-west neighbours, [0]-[2] north-south.
  for (auto [a, b] : {std::pair{0, 1}, {2, 3}, {0, 2}, {1, 3}}) {
    EXPECT_NEAR(haversine_m(four[a], four[b]), 1000.0, 10.0) << a << "-" << b;
  }
  EXPECT_LT(four[0].lat, four[2].lat);
  EXPECT_LT(four[0].lon, four[1].lon);
  g.rows = 0;
  EXPECT_THROW(plan_grid(g), ConfigError);
  g.rows = 1;
  g.spacing_m = -5;
  EXPECT_THROW(plan_grid(g), ConfigError);
}

TEST(PlanGrid, CoverageWarning) {
  QueryGrid g;
  EXPECT_FALSE(coverage_warning(g).has_value());
  g.radius_m = 400;
  EXPECT_TRUE(coverage_warning(g).has_value());
}

TEST_F(FixtureDir, DeduplicatesAcrossCentersKeepingTheLargerTotal) {
  const auto centers = plan_grid(two_by_one());
  write(fs::path("nearby") / (center_hash(centers[0]) + ".json"),
        {{"status", "OK"},
         {"results", {place("A", 42.36, -71.061, 10), place("B", 42.36, -71.062, 3)}}});
  write(fs::path("nearby") / (center_hash(centers[1]) + ".json"),
        {{"status", "OK"},
         {"results", {place("B", 42.36, -71.062, 7), place("C", 42.36, -71.05, 1)}}});
  details("A", 7);
  details("B", 0);
  details("C", 2);
  FixtureBackend backend(dir_);
  const Collection c = collect(two_by_one(), backend);
  ASSERT_EQ(c.places.size(), 3u);
  EXPECT_EQ(c.places[0].place_id, "A");
  EXPECT_EQ(c.places[1].place_id, "B");
  EXPECT_EQ(c.places[1].total_user_ratings, 7);
  // A: 7 raw reviews truncated to 5, B: none, C: 2.
  EXPECT_EQ(c.reviews.size(), 7u);
  for (const Review &r : c.reviews) {
    const auto &p = *std::find_if(c.places.begin(), c.places.end(),
                                  [&](const Place &x) { return x.place_id == r.place_id; });
    EXPECT_EQ(r.location, p.location);
  }
  EXPECT_EQ(c.reviews[4].text, "review 4");  // backend order kept
}

TEST_F(FixtureDir, TopFiveAndEmpty) {
  details("P", 7);
  details("Q", 0);
  FixtureBackend backend(dir_);
  Place p{"P", "p", {1, 2}, std::nullopt, 0};
  EXPECT_EQ(fetch_reviews(p, backend).size(), 5u);
  EXPECT_TRUE(fetch_reviews({"Q", "q", {1, 2}, std::nullopt, 0}, backend).empty());
  EXPECT_THROW(fetch_reviews({"nope", "", {0, 0}, std::nullopt, 0}, backend), NotFoundError);
  EXPECT_THROW(fetch_reviews({"../etc", "", {0, 0}, std::nullopt, 0}, backend), NotFoundError);
}

TEST_F(FixtureDir, EmptyFixtureGivesNoPlaces) {
  FixtureBackend backend(dir_);
  EXPECT_TRUE(nearby_search({42.36, -71.06}, 750, "park", backend).empty());
}

TEST_F(FixtureDir, MissingPlaceIdIsAParseErrorNamingTheField) {
  const auto centers = plan_grid(QueryGrid{});
  json bad = place("A", 42.36, -71.06, 1);
  bad.erase("place_id");
  write(fs::path("nearby") / (center_hash(centers[0]) + ".json"),
        {{"status", "OK"}, {"results", {bad}}});
  FixtureBackend backend(dir_);
  try {
    collect(QueryGrid{}, backend);
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("place_id"), std::string::npos) << e.what();
  }
}

TEST_F(FixtureDir, PaginationFollowsTokens) {
  const auto centers = plan_grid(QueryGrid{});
  const std::string h = center_hash(centers[0]);
  write(fs::path("nearby") / (h + ".json"),
        {{"status", "OK"}, {"results", {place("A", 42.36, -71.06, 1)}}, {"next_page_token", h + "-p2"}});
  write(fs::path("nearby") / (h + "-p2.json"),
        {{"status", "OK"}, {"results", {place("B", 42.36, -71.06, 1)}}});
  FixtureBackend backend(dir_);
  EXPECT_EQ(nearby_search(centers[0], 750, "park", backend).size(), 2u);
}

TEST(ParseResponses, FieldErrorsAndStatuses) {
  EXPECT_THROW(parse_nearby_response("{", "x"), ParseError);
  EXPECT_THROW(parse_nearby_response(R"({"status":"REQUEST_DENIED"})", "x"), BackendError);
  EXPECT_THROW(parse_details_response(R"({"status":"NOT_FOUND"})", "p", "x"), NotFoundError);
  EXPECT_TRUE(parse_nearby_response(R"({"status":"ZERO_RESULTS","results":[]})", "x").places.empty());
  try {
    parse_details_response(R"({"status":"OK","result":{"reviews":[{"text":"hi","time":5}]}})", "p", "src");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("'rating'"), std::string::npos);
  }
  const auto reviews = parse_details_response(
      R"({"status":"OK","result":{"reviews":[{"text":"  ","rating":3,"time":5},
         {"text":"ok","rating":3,"time":6,"author_name":"z","language":"en"}]}})",
      "p", "src");
  ASSERT_EQ(reviews.size(), 1u);
  EXPECT_EQ(reviews[0].author, "z");
}

TEST(Jsonl, RoundTrip) {
  const std::vector<Review> reviews{{"p1", "Great \"trail\"\nok", "ann", "en", 5, 1700000000, {42.1, -71.2}},
                                    {"p2", "café", "", "fr", 1, 1, {0.5, 0.25}}};
  EXPECT_EQ(parse_reviews_jsonl(reviews_jsonl(reviews)), reviews);
  const std::vector<Place> places{{"p1", "A", {42.1, -71.2}, 4.5, 10},
                                  {"p2", "B", {0.5, 0.25}, std::nullopt, 0}};
  EXPECT_EQ(parse_places_jsonl(places_jsonl(places)), places);
  EXPECT_THROW(parse_reviews_jsonl("{\"place_id\":1}\n"), ParseError);
}

TEST(SyntheticFixtures, PaperScaleCorpusAndIdempotency) {
  const fs::path dir = fs::temp_directory_path() / ("uabsa_synth_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  QueryGrid g;
  g.rows = 10;
  g.cols = 10;
  // 100 centers x 5 places x 7 raw reviews, capped at 5 per place.
  const FixtureSummary s = write_synthetic_fixtures(dir, g, 5, 7, 42);
  EXPECT_EQ(s.unique_places, 500);
  FixtureBackend backend(dir);
  const Collection a = collect(g, backend);
  EXPECT_EQ(a.places.size(), 500u);
  EXPECT_EQ(a.reviews.size(), 2500u);
  const Collection b = collect(g, backend);
  EXPECT_EQ(places_jsonl(a.places), places_jsonl(b.places));
  EXPECT_EQ(reviews_jsonl(a.reviews), reviews_jsonl(b.reviews));
  // A place re-listed by a neighbouring center keeps the larger rating total.
  for (const Place &p : a.places) {
    if (p.place_id == "fx0000_000") {
      const auto raw = json::parse(internal::read_file(
          dir / "nearby" / (center_hash(plan_grid(g)[1]) + ".json")));
      EXPECT_EQ(p.total_user_ratings, raw["results"].back()["user_ratings_total"].get<int64_t>());
    }
  }
  fs::remove_all(dir);
}

}  // namespace
}  // namespace uabsa
