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

#ifndef UABSA_GEO_H_
#define UABSA_GEO_H_

// Aggregation of geo-located aspect predictions: per-polarity frequency
// tables, regular lat/lon grid binning, CSV / GeoJSON / SVG export.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "uabsa/corpus.h"
#include "uabsa/error.h"

namespace uabsa {

struct GeoAspectRecord {
  std::string aspect;  // lower-cased surface form
  Polarity polarity = Polarity::kNeutral;
  double lat = 0;
  double lon = 0;
  std::string place_id;
  int64_t timestamp = 0;

  friend bool operator==(const GeoAspectRecord &, const GeoAspectRecord &) = default;
};

inline std::string normalize_aspect(std::string_view term) {
  std::string s(term);
  for (char &c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

inline bool valid_coordinates(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && lat >= -90 && lat <= 90 &&
         lon >= -180 && lon <= 180;
}

struct FrequencyTable {
  Polarity polarity = Polarity::kPositive;
  // Descending by count, ties in lexicographic order.
  std::vector<std::pair<std::string, int>> entries;
};

inline constexpr size_t kAllTerms = std::numeric_limits<size_t>::max();

inline FrequencyTable aggregate_frequency(const std::vector<GeoAspectRecord> &records,
                                          Polarity polarity, size_t k = kAllTerms) {
  if (k == 0) throw ConfigError("top-k must be >= 1");
  std::map<std::string, int> counts;
  for (const GeoAspectRecord &r : records) {
    if (r.polarity == polarity) ++counts[normalize_aspect(r.aspect)];
  }
  FrequencyTable t;
  t.polarity = polarity;
  t.entries.assign(counts.begin(), counts.end());
  std::stable_sort(t.entries.begin(), t.entries.end(),
                   [](const auto &a, const auto &b) { return a.second > b.second; });
  if (t.entries.size() > k) t.entries.resize(k);
  return t;
}

// ---------------------------------------------------------------------------
// CSV

namespace internal {

inline std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::vector<std::string> csv_split(std::string_view line, int line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) throw ParseError("unterminated quoted field", line_no);
  return fields;
}

}  // namespace internal

inline constexpr std::string_view kFrequencyCsvHeader = "polarity,aspect,count";

// Columns polarity, aspect, count; Positive, Negative, Neutral blocks.
inline std::string frequency_csv(const std::vector<FrequencyTable> &tables) {
  std::string out(kFrequencyCsvHeader);
  out += '\n';
  for (const FrequencyTable &t : tables) {
    for (const auto &[term, count] : t.entries) {
      out += to_string(t.polarity);
      out += ',';
      out += internal::csv_field(term);
      out += ',';
      out += std::to_string(count);
      out += '\n';
    }
  }
  return out;
}

inline std::vector<FrequencyTable> parse_frequency_csv(std::string_view text) {
  std::vector<FrequencyTable> tables;
  for (Polarity p : kAllPolarities) tables.push_back({p, {}});
  bool header = true;
  for (const auto &line : internal::split_lines(text)) {
    if (line.text.empty()) continue;
    if (header) {
      if (line.text != kFrequencyCsvHeader) {
        throw ParseError("expected header '" + std::string(kFrequencyCsvHeader) + "'",
                         line.number);
      }
      header = false;
      continue;
    }
    auto f = internal::csv_split(line.text, line.number);
    if (f.size() != 3) throw ParseError("expected 3 columns", line.number);
    auto pol = parse_polarity(f[0]);
    if (!pol) throw ParseError("unknown polarity '" + f[0] + "'", line.number);
    int count = 0;
    try {
      count = std::stoi(f[2]);
    } catch (const std::exception &) {
      throw ParseError("bad count '" + f[2] + "'", line.number);
    }
    tables[static_cast<int>(*pol)].entries.emplace_back(f[1], count);
  }
  return tables;
}

// ---------------------------------------------------------------------------
// Spatial bins

struct SpatialBin {
  int64_t row = 0;  // floor(lat / cell)
  int64_t col = 0;  // floor(lon / cell)
  double cell_size = 0;
  std::array<int, kNumPolarities> counts{};
  // aspect -> per-polarity counts
  std::map<std::string, std::array<int, kNumPolarities>> aspects;

  std::string id() const { return "r" + std::to_string(row) + "_c" + std::to_string(col); }
  double south() const { return static_cast<double>(row) * cell_size; }
  double west() const { return static_cast<double>(col) * cell_size; }
  double north() const { return static_cast<double>(row + 1) * cell_size; }
  double east() const { return static_cast<double>(col + 1) * cell_size; }
  int total() const { return counts[0] + counts[1] + counts[2]; }
};

// Cell index of a coordinate. A value on a cell boundary belongs to the
// higher-index cell; the 1e-9 nudge absorbs division round-off such as
// 0.03 / 0.01 = 2.9999999999999996.
inline int64_t cell_index(double coord, double cell_size) {
  return static_cast<int64_t>(std::floor(coord / cell_size + 1e-9));
}

inline std::vector<SpatialBin> bin_spatial(const std::vector<GeoAspectRecord> &records,
                                           double cell_size_deg) {
  if (!(cell_size_deg > 0)) throw ConfigError("cell size must be positive");
  std::map<std::pair<int64_t, int64_t>, SpatialBin> bins;
  for (const GeoAspectRecord &r : records) {
    const auto key = std::make_pair(cell_index(r.lat, cell_size_deg),
                                    cell_index(r.lon, cell_size_deg));
    SpatialBin &b = bins[key];
    b.row = key.first;
    b.col = key.second;
    b.cell_size = cell_size_deg;
    const int p = static_cast<int>(r.polarity);
    ++b.counts[p];
    ++b.aspects[normalize_aspect(r.aspect)][p];
  }
  std::vector<SpatialBin> out;
  out.reserve(bins.size());
  for (auto &[_, b] : bins) out.push_back(std::move(b));
  return out;
}

// ---------------------------------------------------------------------------
// GeoJSON. Positions are [lon, lat].

inline std::string export_geojson_points(const std::vector<GeoAspectRecord> &records) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const GeoAspectRecord &r : records) {
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Point"}, {"coordinates", {r.lon, r.lat}}};
    f["properties"] = {{"aspect", r.aspect},
                       {"polarity", std::string(to_string(r.polarity))},
                       {"place_id", r.place_id},
                       {"timestamp", r.timestamp}};
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(2) + "\n";
}

inline std::string export_geojson_cells(const std::vector<SpatialBin> &bins) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const SpatialBin &b : bins) {
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    ring.push_back({b.west(), b.south()});
    ring.push_back({b.east(), b.south()});
    ring.push_back({b.east(), b.north()});
    ring.push_back({b.west(), b.north()});
    ring.push_back({b.west(), b.south()});
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"] = {{"type", "Polygon"},
                     {"coordinates", nlohmann::ordered_json::array({ring})}};
    nlohmann::ordered_json props;
    props["cell"] = b.id();
    for (Polarity p : kAllPolarities) {
      props[normalize_aspect(to_string(p))] = b.counts[static_cast<int>(p)];
    }
    props["total"] = b.total();
    nlohmann::ordered_json aspects = nlohmann::ordered_json::object();
    for (const auto &[term, c] : b.aspects) aspects[term] = {c[0], c[1], c[2]};
    props["aspects"] = std::move(aspects);
    f["properties"] = std::move(props);
    fc["features"].push_back(std::move(f));
  }
  return fc.dump(2) + "\n";
}

namespace internal {

inline bool is_position(const nlohmann::json &p) {
  return p.is_array() && p.size() >= 2 && p[0].is_number() && p[1].is_number() &&
         valid_coordinates(p[1].get<double>(), p[0].get<double>());
}

}  // namespace internal

// Structural check of a FeatureCollection of Point / Polygon features.
// Returns an error description, empty when valid.
inline std::string geojson_error(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    return e.what();
  }
  if (!j.is_object() || j.value("type", "") != "FeatureCollection") {
    return "top level is not a FeatureCollection";
  }
  if (!j.contains("features") || !j["features"].is_array()) return "missing features array";
  size_t k = 0;
  for (const auto &f : j["features"]) {
    const std::string where = "feature " + std::to_string(k++) + ": ";
    if (!f.is_object() || f.value("type", "") != "Feature") return where + "not a Feature";
    if (!f.contains("properties") || !(f["properties"].is_object() || f["properties"].is_null())) {
      return where + "bad properties";
    }
    if (!f.contains("geometry") || !f["geometry"].is_object()) return where + "no geometry";
    const auto &g = f["geometry"];
    const std::string type = g.value("type", "");
    if (!g.contains("coordinates")) return where + "no coordinates";
    const auto &c = g["coordinates"];
    if (type == "Point") {
      if (!internal::is_position(c)) return where + "bad Point position";
    } else if (type == "Polygon") {
      if (!c.is_array() || c.empty()) return where + "Polygon without rings";
      for (const auto &ring : c) {
        if (!ring.is_array() || ring.size() < 4) return where + "ring with < 4 positions";
        for (const auto &p : ring) {
          if (!internal::is_position(p)) return where + "bad ring position";
        }
        if (ring.front() != ring.back()) return where + "ring not closed";
      }
    } else {
      return where + "unsupported geometry type '" + type + "'";
    }
  }
  return {};
}

// Inverse of export_geojson_points.
inline std::vector<GeoAspectRecord> parse_geojson_points(std::string_view text) {
  if (std::string err = geojson_error(text); !err.empty()) throw ParseError(err);
  const nlohmann::json j = nlohmann::json::parse(text);
  std::vector<GeoAspectRecord> out;
  for (const auto &f : j["features"]) {
    if (f["geometry"]["type"] != "Point") throw ParseError("expected Point features");
    const auto &props = f["properties"];
    GeoAspectRecord r;
    try {
      r.aspect = props.at("aspect").get<std::string>();
      auto pol = parse_polarity(props.at("polarity").get<std::string>());
      if (!pol) throw ParseError("bad polarity property");
      r.polarity = *pol;
      r.place_id = props.at("place_id").get<std::string>();
      r.timestamp = props.at("timestamp").get<int64_t>();
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(std::string("feature properties: ") + e.what());
    }
    r.lon = f["geometry"]["coordinates"][0].get<double>();
    r.lat = f["geometry"]["coordinates"][1].get<double>();
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG bar chart of a frequency table.

inline std::string frequency_bar_svg(const FrequencyTable &table, std::string_view title,
                                     size_t k = 10) {
  const size_t n = std::min(k, table.entries.size());
  const int bar_h = 22, gap = 6, left = 150, width = 640, top = 40;
  const int height = top + static_cast<int>(n) * (bar_h + gap) + 20;
  const int max_count = n > 0 ? table.entries.front().second : 1;
  const char *fill = table.polarity == Polarity::kPositive   ? "#2b8a3e"
                     : table.polarity == Polarity::kNegative ? "#c92a2a"
                                                             : "#868e96";
  auto esc = [](std::string_view s) {
    std::string o;
    for (char c : s) {
      if (c == '<') o += "&lt;";
      else if (c == '>') o += "&gt;";
      else if (c == '&') o += "&amp;";
      else if (c == '"') o += "&quot;";
      else o += c;
    }
    return o;
  };
  std::string svg;
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "font-family=\"sans-serif\" font-size=\"13\">\n",
                width, height);
  svg += buf;
  svg += "  <text x=\"10\" y=\"24\" font-size=\"16\">" + esc(title) + "</text>\n";
  for (size_t i = 0; i < n; ++i) {
    const auto &[term, count] = table.entries[i];
    const int y = top + static_cast<int>(i) * (bar_h + gap);
    const int w = (width - left - 60) * count / std::max(1, max_count);
    std::snprintf(buf, sizeof buf,
                  "  <text x=\"%d\" y=\"%d\" text-anchor=\"end\">%s</text>\n"
                  "  <rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"%s\"/>\n"
                  "  <text x=\"%d\" y=\"%d\">%d</text>\n",
                  left - 8, y + 16, esc(term).c_str(), left, y, w, bar_h, fill,
                  left + w + 6, y + 16, count);
    svg += buf;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace uabsa

#endif  // UABSA_GEO_H_
