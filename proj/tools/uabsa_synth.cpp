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

// Generates the synthetic template corpus and Places fixture directories
// used for offline training and pipeline runs.

#include <iostream>

#include "CLI11.hpp"
#include "uabsa/uabsa.h"

int main(int argc, char **argv) {
  CLI::App app{"uabsa-synth: synthetic corpus and fixture generator"};
  app.require_subcommand(1);
  uint64_t seed = 42;
  app.add_option("--seed", seed)->capture_default_str();
  app.fallthrough();

  int sentences = 2500;
  std::string format = "atepc";
  std::string out = "-";
  auto *corpus = app.add_subcommand("corpus", "Template sentences with labelled aspects");
  corpus->add_option("--sentences", sentences)->capture_default_str();
  corpus->add_option("--format", format)->check(CLI::IsMember({"apc", "atepc"}))->capture_default_str();
  corpus->add_option("--out,-o", out)->capture_default_str();

  std::string dir;
  uabsa::QueryGrid grid;
  int places = 5;
  int reviews = 7;
  auto *fixtures = app.add_subcommand("fixtures", "Offline Places API fixture directory");
  fixtures->add_option("--dir", dir)->required();
  fixtures->add_option("--rows", grid.rows)->capture_default_str();
  fixtures->add_option("--cols", grid.cols)->capture_default_str();
  fixtures->add_option("--origin-lat", grid.origin.lat)->capture_default_str();
  fixtures->add_option("--origin-lon", grid.origin.lon)->capture_default_str();
  fixtures->add_option("--spacing-m", grid.spacing_m)->capture_default_str();
  fixtures->add_option("--radius-m", grid.radius_m)->capture_default_str();
  fixtures->add_option("--places-per-center", places)->capture_default_str();
  fixtures->add_option("--reviews-per-place", reviews)->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (corpus->parsed()) {
      const auto records = uabsa::synthetic_apc_corpus(sentences, seed);
      const std::string text = format == "apc"
                                   ? uabsa::serialize_apc(records)
                                   : uabsa::serialize_atepc(uabsa::apc_to_atepc(records));
      if (out == "-") {
        std::cout << text;
      } else {
        uabsa::internal::write_file(out, text);
      }
    } else {
      const auto s = uabsa::write_synthetic_fixtures(dir, grid, places, reviews, seed);
      std::cerr << s.centers << " centers, " << s.unique_places << " places, "
                << s.reviews_written << " reviews within the per-place cap\n";
    }
  } catch (const uabsa::ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
