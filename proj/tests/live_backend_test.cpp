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

#include <atomic>
#include <cstdlib>
#include <thread>

#include "uabsa/live_backend.h"

namespace uabsa {
namespace {

using namespace std::chrono_literals;

// Local stand-in for the Places web service.
class FakePlacesServer {
 public:
  FakePlacesServer() {
    server_.Get("/maps/api/place/nearbysearch/json", [this](const auto &req, auto &res) {
      ++nearby_calls;
      last_key = req.get_param_value("key");
      if (fail_first.load() > 0) {
        --fail_first;
        res.status = 503;
        return;
      }
      if (quota_first.load() > 0) {
        --quota_first;
        res.set_content(R"({"status":"OVER_QUERY_LIMIT","results":[]})", "application/json");
        return;
      }
      if (req.has_param("pagetoken")) {
        res.set_content(R"({"status":"OK","results":[{"place_id":"B","name":"b",
          "geometry":{"location":{"lat":42.0,"lng":-71.0}},"user_ratings_total":2}]})",
                        "application/json");
      } else {
        last_type = req.get_param_value("type");
        last_radius = req.get_param_value("radius");
        res.set_content(R"({"status":"OK","next_page_token":"tok2","results":[{"place_id":"A",
          "name":"a","geometry":{"location":{"lat":42.0,"lng":-71.0}},"rating":4.2,
          "user_ratings_total":9}]})",
                        "application/json");
      }
    });
    server_.Get("/maps/api/place/details/json", [this](const auto &req, auto &res) {
      if (status_override != 0) {
        res.status = status_override;
        return;
      }
      if (req.get_param_value("place_id") == "missing") {
        res.set_content(R"({"status":"NOT_FOUND"})", "application/json");
        return;
      }
      std::string reviews;
      for (int i = 0; i < 6; ++i) {
        reviews += std::string(i ? "," : "") + R"({"text":"r)" + std::to_string(i) +
                   R"(","rating":4,"time":1700000000,"author_name":"x","language":"en"})";
      }
      res.set_content(R"({"status":"OK","result":{"reviews":[)" + reviews + "]}}",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakePlacesServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::atomic<int> nearby_calls{0};
  std::atomic<int> fail_first{0};
  std::atomic<int> quota_first{0};
  std::atomic<int> status_override{0};
  std::string last_key, last_type, last_radius;

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

LiveBackendOptions fast_options(const std::string &url) {
  LiveBackendOptions o;
  o.api_key = "test-key";
  o.base_url = url;
  o.requests_per_second = 1000;
  o.retry_backoff = 1ms;
  o.page_token_delay = 0ms;
  o.timeout = 2s;
  return o;
}

TEST(LiveBackend, NearbySearchFollowsPagesAndSendsParameters) {
  FakePlacesServer server;
  LiveBackend backend(fast_options(server.url()));
  const auto places = nearby_search({42.0, -71.0}, 750, "park", backend);
  ASSERT_EQ(places.size(), 2u);
  EXPECT_EQ(places[0].place_id, "A");
  EXPECT_EQ(server.last_key, "test-key");
  EXPECT_EQ(server.last_type, "park");
  EXPECT_EQ(server.last_radius, "750");
  EXPECT_EQ(fetch_reviews(places[0], backend).size(), 5u);
}

TEST(LiveBackend, RetriesServerErrorsThenSucceeds) {
  FakePlacesServer server;
  server.fail_first = 2;
  LiveBackend backend(fast_options(server.url()));
  EXPECT_EQ(backend.nearby_page({42, -71}, 750, "park", "").places.size(), 1u);
  EXPECT_EQ(server.nearby_calls.load(), 3);
}

TEST(LiveBackend, RetriesQuotaStatusInsideA200Response) {
  FakePlacesServer server;
  server.quota_first = 1;
  LiveBackend backend(fast_options(server.url()));
  EXPECT_EQ(backend.nearby_page({42, -71}, 750, "park", "").places.size(), 1u);
  EXPECT_EQ(server.nearby_calls.load(), 2);

  server.quota_first = 100;
  try {
    backend.nearby_page({42, -71}, 750, "park", "");
    FAIL() << "expected BackendError";
  } catch (const BackendError &e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_NE(std::string(e.what()).find("OVER_QUERY_LIMIT"), std::string::npos) << e.what();
  }
}

TEST(LiveBackend, GivesUpWithARetryableErrorCountingAttempts) {
  FakePlacesServer server;
  server.fail_first = 100;
  LiveBackend backend(fast_options(server.url()));
  try {
    backend.nearby_page({42, -71}, 750, "park", "");
    FAIL() << "expected BackendError";
  } catch (const BackendError &e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_EQ(e.attempts(), 3);
    EXPECT_NE(std::string(e.what()).find("3 attempts"), std::string::npos);
  }
}

TEST(LiveBackend, ClientErrorsAreNotRetried) {
  FakePlacesServer server;
  server.status_override = 403;
  LiveBackend backend(fast_options(server.url()));
  try {
    backend.place_reviews("A");
    FAIL() << "expected BackendError";
  } catch (const BackendError &e) {
    EXPECT_FALSE(e.retryable());
    EXPECT_EQ(e.attempts(), 1);
  }
}

TEST(LiveBackend, UnknownPlaceIsNotFound) {
  FakePlacesServer server;
  LiveBackend backend(fast_options(server.url()));
  EXPECT_THROW(backend.place_reviews("missing"), NotFoundError);
}

TEST(LiveBackend, TransportFailureIsRetryable) {
  std::string url;
  {
    FakePlacesServer server;  // grab a port, then close it
    url = server.url();
  }
  LiveBackend backend(fast_options(url));
  try {
    backend.place_reviews("A");
    FAIL() << "expected BackendError";
  } catch (const BackendError &e) {
    EXPECT_TRUE(e.retryable());
    EXPECT_EQ(e.attempts(), 3);
  }
}

TEST(LiveBackend, KeyComesFromTheEnvironment) {
  ::unsetenv(kApiKeyEnv);
  try {
    live_options_from_env();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_NE(std::string(e.what()).find("PLACES_API_KEY"), std::string::npos);
  }
  ::setenv(kApiKeyEnv, "abc", 1);
  EXPECT_EQ(live_options_from_env().api_key, "abc");
  ::unsetenv(kApiKeyEnv);
}

TEST(TokenBucket, LimitsSustainedRate) {
  using Clock = TokenBucket::Clock;
  const Clock::time_point t0{};
  TokenBucket bucket(10.0, 2.0, t0);
  EXPECT_EQ(bucket.reserve(t0), Clock::duration::zero());
  EXPECT_EQ(bucket.reserve(t0), Clock::duration::zero());
  // Third immediate request waits a tenth of a second, the fourth two.
  EXPECT_NEAR(std::chrono::duration<double>(bucket.reserve(t0)).count(), 0.1, 1e-9);
  EXPECT_NEAR(std::chrono::duration<double>(bucket.reserve(t0)).count(), 0.2, 1e-9);
  // After a long pause the bucket refills only up to its burst size.
  const auto later = t0 + std::chrono::seconds(10);
  EXPECT_EQ(bucket.reserve(later), Clock::duration::zero());
  EXPECT_EQ(bucket.reserve(later), Clock::duration::zero());
  EXPECT_GT(bucket.reserve(later), Clock::duration::zero());
  EXPECT_THROW(TokenBucket(0.0, 1.0), ConfigError);
}

}  // namespace
}  // namespace uabsa
