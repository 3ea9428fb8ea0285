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

#ifndef UABSA_LIVE_BACKEND_H_
#define UABSA_LIVE_BACKEND_H_

// HTTP backend for the places web API. Requires cpp-httplib; define
// CPPHTTPLIB_OPENSSL_SUPPORT before including to reach https endpoints.

#include <chrono>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "uabsa/error.h"
#include "uabsa/ingest.h"

namespace uabsa {

inline constexpr const char *kApiKeyEnv = "PLACES_API_KEY";
inline constexpr const char *kDefaultPlacesBaseUrl = "https://maps.googleapis.com";

// Token bucket: `rate` tokens per second, holding at most `burst`.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;

  TokenBucket(double rate, double burst, Clock::time_point now = Clock::now())
      : rate_(rate), burst_(burst), tokens_(burst), last_(now) {
    if (!(rate > 0) || !(burst >= 1)) throw ConfigError("rate limit must be positive");
  }

  // Takes one token and returns how long the caller must wait before using it.
  Clock::duration reserve(Clock::time_point now) {
    refill(now);
    tokens_ -= 1.0;
    if (tokens_ >= 0) return Clock::duration::zero();
    return std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(-tokens_ / rate_));
  }

  void acquire() {
    const auto wait = reserve(Clock::now());
    if (wait > Clock::duration::zero()) std::this_thread::sleep_for(wait);
  }

 private:
  void refill(Clock::time_point now) {
    if (now > last_) {
      tokens_ = std::min(burst_, tokens_ + rate_ * std::chrono::duration<double>(now - last_).count());
      last_ = now;
    }
  }

  double rate_;
  double burst_;
  double tokens_;
  Clock::time_point last_;
};

struct LiveBackendOptions {
  std::string api_key;
  std::string base_url = kDefaultPlacesBaseUrl;
  double requests_per_second = 10.0;
  int max_attempts = 3;
  std::chrono::milliseconds retry_backoff{500};
  // The API only honours a next_page_token after a short delay.
  std::chrono::milliseconds page_token_delay{2000};
  std::chrono::seconds timeout{10};
};

// Reads the key from PLACES_API_KEY.
inline LiveBackendOptions live_options_from_env() {
  LiveBackendOptions o;
  const char *key = std::getenv(kApiKeyEnv);
  if (key == nullptr || *key == '\0') {
    throw ConfigError(std::string("live backend needs an API key in ") + kApiKeyEnv);
  }
  o.api_key = key;
  return o;
}

class LiveBackend : public PlacesBackend {
 public:
  explicit LiveBackend(LiveBackendOptions opts)
      : opts_(std::move(opts)),
        bucket_(opts_.requests_per_second, std::max(1.0, opts_.requests_per_second)),
        client_(opts_.base_url) {
    if (opts_.api_key.empty()) {
      throw ConfigError(std::string("live backend needs an API key in ") + kApiKeyEnv);
    }
    if (opts_.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    client_.set_connection_timeout(opts_.timeout);
    client_.set_read_timeout(opts_.timeout);
  }

  NearbyPage nearby_page(LatLon center, double radius_m, std::string_view category,
                         std::string_view page_token) override {
    httplib::Params params;
    if (page_token.empty()) {
      char loc[64];
      std::snprintf(loc, sizeof loc, "%.6f,%.6f", center.lat, center.lon);
      params.emplace("location", loc);
      params.emplace("radius", std::to_string(static_cast<long>(std::lround(radius_m))));
      params.emplace("type", std::string(category));
    } else {
      if (opts_.page_token_delay.count() > 0) std::this_thread::sleep_for(opts_.page_token_delay);
      params.emplace("pagetoken", std::string(page_token));
    }
    const std::string body = get("/maps/api/place/nearbysearch/json", params);
    return parse_nearby_response(body, "nearby " + center_key(center));
  }

  std::vector<Review> place_reviews(const std::string &place_id) override {
    httplib::Params params{{"place_id", place_id}, {"fields", "place_id,reviews"}};
    const std::string body = get("/maps/api/place/details/json", params);
    return parse_details_response(body, place_id, "details " + place_id);
  }

 private:
  std::string get(const std::string &path, httplib::Params params) {
    params.emplace("key", opts_.api_key);
    const std::string target = httplib::append_query_params(path, params);
    std::string last_error;
    for (int attempt = 1; attempt <= opts_.max_attempts; ++attempt) {
      bucket_.acquire();
      auto res = client_.Get(target);
      if (!res) {
        last_error = "transport failure: " + httplib::to_string(res.error());
      } else if (res->status >= 500 || res->status == 429) {
        last_error = "HTTP " + std::to_string(res->status);
      } else if (res->status != 200) {
        throw BackendError(path + ": HTTP " + std::to_string(res->status), false, attempt);
      } else if (const std::string s = quota_status(res->body); !s.empty()) {
        last_error = "status " + s;
      } else {
        return res->body;
      }
      if (attempt < opts_.max_attempts) std::this_thread::sleep_for(opts_.retry_backoff * attempt);
    }
    throw BackendError(path + ": " + last_error, true, opts_.max_attempts);
  }

  // Transient service statuses arrive as HTTP 200 with a JSON status field.
  static std::string quota_status(const std::string &body) {
    const nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (!j.is_object() || !j.contains("status") || !j["status"].is_string()) return "";
    const std::string status = j["status"];
    return status == "OVER_QUERY_LIMIT" || status == "UNKNOWN_ERROR" ? status : "";
  }

  LiveBackendOptions opts_;
  TokenBucket bucket_;
  httplib::Client client_;
};

}  // namespace uabsa

#endif  // UABSA_LIVE_BACKEND_H_
