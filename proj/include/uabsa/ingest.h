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

#ifndef UABSA_INGEST_H_
#define UABSA_INGEST_H_

// Place and review collection: a regular grid of nearby-search queries,
// de-duplication by place id, then up to five reviews per place from a
// details query. Backends answer in the JSON shape of the public places
// web API; FixtureBackend serves canned responses from disk.
//
// Fixture layout:
//   <dir>/nearby/<center-hash>.json   nearby-search response for a center
//   <dir>/nearby/<page-token>.json    continuation page (next_page_token)
//   <dir>/details/<place_id>.json     details response with reviews
// where center-hash = fnv1a64("%.6f,%.6f" % (lat, lon)) as 16 hex digits.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uabsa/corpus.h"
#include "uabsa/error.h"

namespace uabsa {

struct LatLon {
  double lat = 0;
  double lon = 0;
  friend bool operator==(const LatLon &, const LatLon &) = default;
};

struct Place {
  std::string place_id;
  std::string name;
  LatLon location;
  std::optional<double> rating;
  int64_t total_user_ratings = 0;
  friend bool operator==(const Place &, const Place &) = default;
};

struct Review {
  std::string place_id;
  std::string text;
  std::string author;
  std::string language;
  int rating = 0;
  int64_t timestamp = 0;
  LatLon location;
  friend bool operator==(const Review &, const Review &) = default;
};

struct QueryGrid {
  LatLon origin{42.36, -71.06};
  int rows = 1;
  int cols = 1;
  double spacing_m = 1000;
  double radius_m = 750;
  std::string category = "park";
};

inline constexpr double kEarthRadiusM = 6371008.8;
inline constexpr int kMaxReviewsPerPlace = 5;

inline double haversine_m(LatLon a, LatLon b) {
  constexpr double rad = M_PI / 180.0;
  const double dlat = (b.lat - a.lat) * rad;
  const double dlon = (b.lon - a.lon) * rad;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat * rad) * std::cos(b.lat * rad) *
                       std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

// Query centers in row-major order (south to north, west to east) on an
// equirectangular grid centred on the origin.
inline std::vector<LatLon> plan_grid(const QueryGrid &g) {
  if (g.rows <= 0 || g.cols <= 0) {
    throw ConfigError("grid rows and cols must be positive (got " +
                      std::to_string(g.rows) + "x" + std::to_string(g.cols) + ")");
  }
  if (!(g.spacing_m > 0)) throw ConfigError("grid spacing must be positive");
  if (!(g.radius_m > 0)) throw ConfigError("query radius must be positive");
  if (g.origin.lat < -90 || g.origin.lat > 90 || g.origin.lon < -180 ||
      g.origin.lon > 180) {
    throw ConfigError("grid origin outside valid coordinates");
  }
  const double m_per_deg_lat = kEarthRadiusM * M_PI / 180.0;
  const double dlat = g.spacing_m / m_per_deg_lat;
  const double dlon = dlat / std::cos(g.origin.lat * M_PI / 180.0);
  std::vector<LatLon> centers;
  centers.reserve(static_cast<size_t>(g.rows) * g.cols);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      LatLon p{g.origin.lat + (r - (g.rows - 1) / 2.0) * dlat,
               g.origin.lon + (c - (g.cols - 1) / 2.0) * dlon};
      if (p.lat < -90 || p.lat > 90) throw ConfigError("grid extends past a pole");
      if (p.lon < -180) p.lon += 360;
      if (p.lon > 180) p.lon -= 360;
      centers.push_back(p);
    }
  }
  return centers;
}

// Circles of radius_m leave gaps between centers when radius < spacing / 2.
inline std::optional<std::string> coverage_warning(const QueryGrid &g) {
  if (g.radius_m < g.spacing_m / 2) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "query radius %.0f m is below half the grid spacing (%.0f m); "
                  "coverage will have gaps",
                  g.radius_m, g.spacing_m);
    return std::string(buf);
  }
  return std::nullopt;
}

inline std::string center_key(LatLon c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f,%.6f", c.lat, c.lon);
  return buf;
}

inline std::string center_hash(LatLon c) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : center_key(c)) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Response parsing (shared by all backends)

struct NearbyPage {
  std::vector<Place> places;
  std::string next_page_token;
};

namespace internal {

inline nlohmann::json parse_json(std::string_view text, const std::string &source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(source + ": invalid JSON: " + e.what());
  }
}

inline void check_status(const nlohmann::json &j, const std::string &source) {
  if (!j.is_object()) throw ParseError(source + ": response is not an object");
  if (!j.contains("status")) return;
  if (!j["status"].is_string()) throw ParseError(source + ": field 'status' is not a string");
  const std::string status = j["status"];
  if (status == "OK" || status == "ZERO_RESULTS") return;
  if (status == "NOT_FOUND" || status == "INVALID_REQUEST") {
    throw NotFoundError(source + ": status " + status);
  }
  const bool retryable = status == "OVER_QUERY_LIMIT" || status == "UNKNOWN_ERROR";
  throw BackendError(source + ": status " + status, retryable, 1);
}

template <typename V>
V required(const nlohmann::json &obj, const char *key, const std::string &where) {
  if (!obj.is_object() || !obj.contains(key) || obj[key].is_null()) {
    throw ParseError(where + ": missing field '" + key + "'");
  }
  try {
    return obj[key].get<V>();
  } catch (const nlohmann::json::exception &) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

}  // namespace internal

inline NearbyPage parse_nearby_response(std::string_view text, const std::string &source) {
  const nlohmann::json j = internal::parse_json(text, source);
  internal::check_status(j, source);
  NearbyPage page;
  if (j.contains("results")) {
    if (!j["results"].is_array()) throw ParseError(source + ": field 'results' is not an array");
    size_t i = 0;
    for (const auto &r : j["results"]) {
      const std::string where = source + ": results[" + std::to_string(i++) + "]";
      Place p;
      p.place_id = internal::required<std::string>(r, "place_id", where);
      if (p.place_id.empty()) throw ParseError(where + ": field 'place_id' is empty");
      p.name = r.contains("name") && r["name"].is_string() ? r["name"].get<std::string>() : "";
      const auto geometry = internal::required<nlohmann::json>(r, "geometry", where);
      const auto loc = internal::required<nlohmann::json>(geometry, "location", where + ".geometry");
      p.location.lat = internal::required<double>(loc, "lat", where + ".geometry.location");
      p.location.lon = internal::required<double>(loc, "lng", where + ".geometry.location");
      if (p.location.lat < -90 || p.location.lat > 90 || p.location.lon < -180 ||
          p.location.lon > 180) {
        throw ParseError(where + ": field 'geometry.location' out of range");
      }
      if (r.contains("rating") && !r["rating"].is_null()) {
        p.rating = internal::required<double>(r, "rating", where);
        if (*p.rating < 1.0 || *p.rating > 5.0) {
          throw ParseError(where + ": field 'rating' outside [1, 5]");
        }
      }
      if (r.contains("user_ratings_total")) {
        p.total_user_ratings = internal::required<int64_t>(r, "user_ratings_total", where);
        if (p.total_user_ratings < 0) {
          throw ParseError(where + ": field 'user_ratings_total' is negative");
        }
      }
      page.places.push_back(std::move(p));
    }
  }
  if (j.contains("next_page_token") && j["next_page_token"].is_string()) {
    page.next_page_token = j["next_page_token"];
  }
  return page;
}

// Reviews in response order. Rating-only reviews (blank text) are dropped.
inline std::vector<Review> parse_details_response(std::string_view text,
                                                  const std::string &place_id,
                                                  const std::string &source) {
  const nlohmann::json j = internal::parse_json(text, source);
  internal::check_status(j, source);
  const auto result = internal::required<nlohmann::json>(j, "result", source);
  std::vector<Review> out;
  if (!result.contains("reviews")) return out;
  if (!result["reviews"].is_array()) throw ParseError(source + ": field 'reviews' is not an array");
  size_t i = 0;
  for (const auto &r : result["reviews"]) {
    const std::string where = source + ": reviews[" + std::to_string(i++) + "]";
    Review rev;
    rev.place_id = place_id;
    rev.text = internal::required<std::string>(r, "text", where);
    rev.author = r.contains("author_name") && r["author_name"].is_string()
                     ? r["author_name"].get<std::string>()
                     : "";
    rev.language = r.contains("language") && r["language"].is_string()
                       ? r["language"].get<std::string>()
                       : "";
    rev.rating = internal::required<int>(r, "rating", where);
    if (rev.rating < 1 || rev.rating > 5) throw ParseError(where + ": field 'rating' outside 1..5");
    rev.timestamp = internal::required<int64_t>(r, "time", where);
    if (rev.timestamp <= 0) throw ParseError(where + ": field 'time' must be positive");
    if (internal::trim(rev.text).empty()) continue;
    out.push_back(std::move(rev));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Backends

class PlacesBackend {
 public:
  virtual ~PlacesBackend() = default;
  // One page of a nearby search; page_token is empty for the first page.
  virtual NearbyPage nearby_page(LatLon center, double radius_m, std::string_view category,
                                 std::string_view page_token) = 0;
  // All reviews the backend returns for a place, in backend order.
  virtual std::vector<Review> place_reviews(const std::string &place_id) = 0;
};

class FixtureBackend : public PlacesBackend {
 public:
  explicit FixtureBackend(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_)) {
      throw ConfigError("fixture directory not found: " + dir_.string());
    }
  }

  // A center without a fixture file has no places.
  NearbyPage nearby_page(LatLon center, double, std::string_view,
                         std::string_view page_token) override {
    const std::string name = page_token.empty() ? center_hash(center) : std::string(page_token);
    check_name(name);
    const auto path = dir_ / "nearby" / (name + ".json");
    if (!std::filesystem::exists(path)) {
      if (!page_token.empty()) throw NotFoundError("missing fixture page " + path.string());
      return {};
    }
    return parse_nearby_response(read(path), path.string());
  }

  std::vector<Review> place_reviews(const std::string &place_id) override {
    check_name(place_id);
    const auto path = dir_ / "details" / (place_id + ".json");
    if (!std::filesystem::exists(path)) {
      throw NotFoundError("unknown place_id '" + place_id + "' (no " + path.string() + ")");
    }
    return parse_details_response(read(path), place_id, path.string());
  }

 private:
  static void check_name(const std::string &name) {
    if (name.empty() || name.find('/') != std::string::npos ||
        name.find('\\') != std::string::npos || name.find("..") != std::string::npos) {
      throw NotFoundError("invalid fixture key '" + name + "'");
    }
  }

  static std::string read(const std::filesystem::path &path) {
    std::FILE *f = std::fopen(path.c_str(), "rb");
    if (!f) throw BackendError("cannot read " + path.string(), false, 1);
    std::string out;
    char buf[8192];
    size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) out.append(buf, n);
    std::fclose(f);
    return out;
  }

  std::filesystem::path dir_;
};

// Merges places by place_id, keeping the record with the larger
// total_user_ratings (the earlier one on ties).
inline void merge_places(std::map<std::string, Place> &into, std::vector<Place> places) {
  for (Place &p : places) {
    auto it = into.find(p.place_id);
    if (it == into.end()) {
      into.emplace(p.place_id, std::move(p));
    } else if (p.total_user_ratings > it->second.total_user_ratings) {
      it->second = std::move(p);
    }
  }
}

// All pages of one nearby search, de-duplicated and sorted by place_id.
inline std::vector<Place> nearby_search(LatLon center, double radius_m,
                                        std::string_view category, PlacesBackend &backend,
                                        int max_pages = 3) {
  std::map<std::string, Place> merged;
  std::string token;
  for (int page = 0; page < max_pages; ++page) {
    NearbyPage p = backend.nearby_page(center, radius_m, category, token);
    merge_places(merged, std::move(p.places));
    if (p.next_page_token.empty()) break;
    token = std::move(p.next_page_token);
  }
  std::vector<Place> out;
  for (auto &[_, p] : merged) out.push_back(std::move(p));
  return out;
}

// The first max_reviews reviews in backend order, stamped with the place's
// location.
inline std::vector<Review> fetch_reviews(const Place &place, PlacesBackend &backend,
                                         int max_reviews = kMaxReviewsPerPlace) {
  std::vector<Review> reviews = backend.place_reviews(place.place_id);
  if (static_cast<int>(reviews.size()) > max_reviews) reviews.resize(max_reviews);
  for (Review &r : reviews) {
    r.place_id = place.place_id;
    r.location = place.location;
  }
  return reviews;
}

struct Collection {
  std::vector<Place> places;    // sorted by place_id
  std::vector<Review> reviews;  // grouped by place, backend order within a place
  std::vector<std::string> warnings;
};

inline Collection collect(const QueryGrid &grid, PlacesBackend &backend,
                          int max_reviews = kMaxReviewsPerPlace) {
  Collection out;
  if (auto w = coverage_warning(grid)) out.warnings.push_back(*w);
  std::map<std::string, Place> merged;
  for (const LatLon &c : plan_grid(grid)) {
    merge_places(merged, nearby_search(c, grid.radius_m, grid.category, backend));
  }
  for (auto &[_, p] : merged) out.places.push_back(std::move(p));
  for (const Place &p : out.places) {
    for (Review &r : fetch_reviews(p, backend, max_reviews)) out.reviews.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON lines persistence

inline nlohmann::ordered_json place_to_json(const Place &p) {
  nlohmann::ordered_json j;
  j["place_id"] = p.place_id;
  j["name"] = p.name;
  j["lat"] = p.location.lat;
  j["lon"] = p.location.lon;
  j["rating"] = p.rating ? nlohmann::ordered_json(*p.rating) : nlohmann::ordered_json(nullptr);
  j["user_ratings_total"] = p.total_user_ratings;
  return j;
}

inline nlohmann::ordered_json review_to_json(const Review &r) {
  nlohmann::ordered_json j;
  j["place_id"] = r.place_id;
  j["author"] = r.author;
  j["language"] = r.language;
  j["rating"] = r.rating;
  j["timestamp"] = r.timestamp;
  j["lat"] = r.location.lat;
  j["lon"] = r.location.lon;
  j["text"] = r.text;
  return j;
}

template <typename V, typename F>
std::string to_jsonl(const std::vector<V> &items, F &&to_json) {
  std::string out;
  for (const V &v : items) out += to_json(v).dump() + "\n";
  return out;
}

inline std::string places_jsonl(const std::vector<Place> &places) {
  return to_jsonl(places, place_to_json);
}

inline std::string reviews_jsonl(const std::vector<Review> &reviews) {
  return to_jsonl(reviews, review_to_json);
}

inline std::vector<Review> parse_reviews_jsonl(std::string_view text) {
  std::vector<Review> out;
  for (const auto &line : internal::split_lines(text)) {
    if (internal::is_blank(line.text)) continue;
    const std::string where = "reviews line " + std::to_string(line.number);
    const nlohmann::json j = internal::parse_json(line.text, where);
    Review r;
    r.place_id = internal::required<std::string>(j, "place_id", where);
    r.author = j.value("author", "");
    r.language = j.value("language", "");
    r.rating = internal::required<int>(j, "rating", where);
    r.timestamp = internal::required<int64_t>(j, "timestamp", where);
    r.location.lat = internal::required<double>(j, "lat", where);
    r.location.lon = internal::required<double>(j, "lon", where);
    r.text = internal::required<std::string>(j, "text", where);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<Place> parse_places_jsonl(std::string_view text) {
  std::vector<Place> out;
  for (const auto &line : internal::split_lines(text)) {
    if (internal::is_blank(line.text)) continue;
    const std::string where = "places line " + std::to_string(line.number);
    const nlohmann::json j = internal::parse_json(line.text, where);
    Place p;
    p.place_id = internal::required<std::string>(j, "place_id", where);
    p.name = j.value("name", "");
    p.location.lat = internal::required<double>(j, "lat", where);
    p.location.lon = internal::required<double>(j, "lon", where);
    if (j.contains("rating") && !j["rating"].is_null()) p.rating = j["rating"].get<double>();
    p.total_user_ratings = j.value("user_ratings_total", int64_t{0});
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace uabsa

#endif  // UABSA_INGEST_H_
