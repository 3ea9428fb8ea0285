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

// uabsa: command-line driver for the review aspect-sentiment pipeline.
//
//   ingest   grid search + review fetch  -> places.jsonl, reviews.jsonl
//   convert  APC <-> ATEPC annotation files
//   train    fit the LCF model on ATEPC data -> checkpoint + history
//   eval     score a checkpoint on ATEPC data
//   infer    extract aspects and polarities from review text
//   analyze  predictions + reviews -> frequency.csv, GeoJSON
//   plot     frequency.csv -> SVG bar charts
//
// Exit codes: 0 ok, 1 unexpected failure, 2 usage/config error,
// 3 backend failure, 4 input parse error, 5 missing checkpoint.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "uabsa/live_backend.h"
#include "uabsa/uabsa.h"

namespace fs = std::filesystem;
using namespace uabsa;

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kBackend = 3, kParse = 4, kNoCheckpoint = 5 };

class CheckpointMissing : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Globals {
  uint64_t seed = 42;
  std::string config;
  bool verbose = false;
};

std::string read_input(const std::string &path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open input file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string &path, const std::string &text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  internal::write_file(path, text);
}

LcfModel<float> open_checkpoint(const std::string &path) {
  if (path.empty() || !fs::exists(path)) {
    throw CheckpointMissing("checkpoint not found: '" + path + "'");
  }
  if (!fs::exists(path + ".json")) {
    throw CheckpointMissing("checkpoint manifest not found: '" + path + ".json'");
  }
  return load_checkpoint(path);
}

std::vector<AtepcSentence> read_atepc(const std::string &path) {
  return parse_atepc(read_input(path));
}

// ---------------------------------------------------------------------------

struct IngestOptions {
  std::string backend = "fixture";
  std::string fixtures;
  std::string out = ".";
  QueryGrid grid;
  double rate_limit = 10.0;
  int max_reviews = kMaxReviewsPerPlace;
  std::string base_url = kDefaultPlacesBaseUrl;
};

int run_ingest(const IngestOptions &o, const Globals &g) {
  std::unique_ptr<PlacesBackend> backend;
  if (o.backend == "fixture") {
    if (o.fixtures.empty()) throw ConfigError("--fixtures is required with --backend fixture");
    backend = std::make_unique<FixtureBackend>(o.fixtures);
  } else {
    LiveBackendOptions lo = live_options_from_env();
    lo.base_url = o.base_url;
    lo.requests_per_second = o.rate_limit;
    backend = std::make_unique<LiveBackend>(lo);
  }
  plan_grid(o.grid);  // validate before touching the backend
  Collection c = collect(o.grid, *backend, o.max_reviews);
  for (const auto &w : c.warnings) std::cerr << "warning: " << w << "\n";
  internal::write_file(fs::path(o.out) / "places.jsonl", places_jsonl(c.places));
  internal::write_file(fs::path(o.out) / "reviews.jsonl", reviews_jsonl(c.reviews));
  std::cerr << "ingest: " << c.places.size() << " places, " << c.reviews.size()
            << " reviews -> " << o.out << "\n";
  (void)g;
  return kOk;
}

// ---------------------------------------------------------------------------

struct ConvertOptions {
  std::string from = "apc";
  std::string to = "atepc";
  std::string input;
  std::string output = "-";
};

int run_convert(const ConvertOptions &o) {
  const std::string text = read_input(o.input);
  std::string out;
  if (o.from == "apc") {
    auto records = parse_apc(text);
    out = o.to == "atepc" ? serialize_atepc(apc_to_atepc(records)) : serialize_apc(records);
  } else {
    auto sentences = parse_atepc(text);
    out = o.to == "apc" ? serialize_apc(atepc_to_apc(sentences)) : serialize_atepc(sentences);
  }
  write_output(o.output, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct TrainOptions {
  std::string data;
  std::string out;
  std::string log;
  std::string test_out;
  std::string report;
  std::string alpha = "3";
  std::string lcf_mode = "cdw";
  bool save_every_epoch = false;
  ModelConfig model;
  TrainConfig train;
};

int run_train(TrainOptions o, const Globals &g) {
  auto mode = parse_lcf_mode(o.lcf_mode);
  if (!mode) throw ConfigError("unknown --lcf-mode '" + o.lcf_mode + "' (cdm, cdw, fusion)");
  o.model.lcf_mode = *mode;
  o.model.srd_threshold = parse_alpha(o.alpha);
  o.model.seed = g.seed;
  o.train.seed = g.seed;
  o.train.validate();
  const std::vector<AtepcSentence> corpus = read_atepc(o.data);
  if (corpus.empty()) throw ConfigError("training data '" + o.data + "' is empty");
  Split data = split(corpus, o.train);
  int longest = 0;
  for (const auto &s : data.train) longest = std::max(longest, s.size());
  if (longest > o.model.max_len) {
    throw ConfigError("longest training sentence has " + std::to_string(longest) +
                      " tokens; raise --max-len (currently " +
                      std::to_string(o.model.max_len) + ")");
  }
  LcfModel<float> model(o.model, Vocabulary::build(data.train));
  const std::string log_path = o.log.empty() ? o.out + ".history.jsonl" : o.log;
  std::string log;
  int epoch_no = 0;
  auto on_epoch = [&](const EpochRecord &e) {
    log += epoch_to_json(e).dump() + "\n";
    ++epoch_no;
    if (g.verbose) {
      std::fprintf(stderr, "epoch %d  tag_loss %.4f  polarity_loss %.4f  ate_f1 %.4f  apc_f1 %.4f  (%.1fs)\n",
                   e.epoch, e.tag_loss, e.polarity_loss, e.ate_f1, e.apc_f1, e.seconds);
    }
    if (o.save_every_epoch) {
      save_checkpoint(model, o.out + ".epoch" + std::to_string(e.epoch));
    }
  };
  std::fprintf(stderr, "train: %zu train / %zu test sentence copies, vocab %d, %zu parameters\n",
               data.train.size(), data.test.size(), model.vocab().size(),
               model.params().count());
  train(model, data.train, data.test, o.train, on_epoch);
  save_checkpoint(model, o.out);
  internal::write_file(log_path, log);
  if (!o.test_out.empty()) internal::write_file(o.test_out, serialize_atepc(data.test));
  if (!data.test.empty()) {
    const MetricReport r = evaluate(model, data.test);
    std::cout << format_table({{"LCF (" + std::string(to_string(model.config().lcf_mode)) +
                                    ", alpha=" + alpha_to_string(model.config().srd_threshold) + ")",
                                r}});
    if (!o.report.empty()) internal::write_file(o.report, report_to_json(r).dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalOptions {
  std::string checkpoint;
  std::vector<std::string> compare;
  std::string data;
  std::string report;
  bool echo_oracle = false;
};

int run_eval(const EvalOptions &o) {
  const std::vector<AtepcSentence> test = read_atepc(o.data);
  std::vector<std::pair<std::string, MetricReport>> rows;
  if (o.echo_oracle) {
    rows.emplace_back("gold echo", evaluate(GoldEchoModel(test), test));
  } else {
    const LcfModel<float> model = open_checkpoint(o.checkpoint);
    rows.emplace_back(fs::path(o.checkpoint).filename().string(), evaluate(model, test));
  }
  for (const std::string &path : o.compare) {
    const LcfModel<float> other = open_checkpoint(path);
    rows.emplace_back(fs::path(path).filename().string(), evaluate(other, test));
  }
  // Keep stdout clean for the JSON when the report goes there.
  (o.report == "-" ? std::cerr : std::cout) << format_table(rows);
  if (!o.report.empty()) {
    nlohmann::ordered_json j = report_to_json(rows.front().second);
    write_output(o.report, j.dump(2) + "\n");
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct InferOptions {
  std::string checkpoint;
  std::string input = "-";
  std::string output = "-";
  std::string format = "text";
};

nlohmann::ordered_json prediction_json(const std::string &text,
                                       const std::vector<AspectPrediction> &preds) {
  nlohmann::ordered_json j;
  j["text"] = text;
  j["aspects"] = nlohmann::ordered_json::array();
  for (const AspectPrediction &p : preds) {
    nlohmann::ordered_json a;
    a["term"] = p.term;
    a["span"] = {p.span.start, p.span.end};
    a["polarity"] = std::string(to_string(p.polarity));
    a["confidence"] = p.confidence;
    j["aspects"].push_back(std::move(a));
  }
  return j;
}

int run_infer(const InferOptions &o) {
  const LcfModel<float> model = open_checkpoint(o.checkpoint);
  const std::string input = read_input(o.input);
  std::string out;
  if (o.format == "jsonl") {
    const std::vector<Review> reviews = parse_reviews_jsonl(input);
    for (size_t i = 0; i < reviews.size(); ++i) {
      nlohmann::ordered_json j = prediction_json(reviews[i].text, model.predict(reviews[i].text));
      j["review_index"] = i;
      j["place_id"] = reviews[i].place_id;
      out += j.dump() + "\n";
    }
  } else {
    for (const auto &line : internal::split_lines(input)) {
      if (internal::is_blank(line.text)) continue;
      const std::string text(line.text);
      out += prediction_json(text, model.predict(text)).dump() + "\n";
    }
  }
  write_output(o.output, out);
  return kOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  std::string predictions;
  std::string reviews;
  std::string out_dir = ".";
  double cell_size = 0.005;
};

int run_analyze(const AnalyzeOptions &o) {
  const std::vector<Review> reviews = parse_reviews_jsonl(read_input(o.reviews));
  std::vector<GeoAspectRecord> records;
  size_t line_no = 0;
  const std::string predictions = read_input(o.predictions);
  for (const auto &line : internal::split_lines(predictions)) {
    if (internal::is_blank(line.text)) continue;
    const std::string where = "predictions line " + std::to_string(line.number);
    const nlohmann::json j = internal::parse_json(line.text, where);
    const size_t index = j.contains("review_index") ? j["review_index"].get<size_t>() : line_no;
    ++line_no;
    if (index >= reviews.size()) {
      throw ParseError(where + ": no matching review (index " + std::to_string(index) + ")");
    }
    const Review &rev = reviews[index];
    if (internal::required<std::string>(j, "text", where) != rev.text) {
      throw ParseError(where + ": text differs from review " + std::to_string(index));
    }
    for (const auto &a : internal::required<nlohmann::json>(j, "aspects", where)) {
      GeoAspectRecord r;
      r.aspect = normalize_aspect(internal::required<std::string>(a, "term", where));
      auto pol = parse_polarity(internal::required<std::string>(a, "polarity", where));
      if (!pol) throw ParseError(where + ": unknown polarity");
      r.polarity = *pol;
      r.lat = rev.location.lat;
      r.lon = rev.location.lon;
      r.place_id = rev.place_id;
      r.timestamp = rev.timestamp;
      records.push_back(std::move(r));
    }
  }
  std::vector<FrequencyTable> tables;
  for (Polarity p : kAllPolarities) tables.push_back(aggregate_frequency(records, p));
  const fs::path dir(o.out_dir);
  internal::write_file(dir / "frequency.csv", frequency_csv(tables));
  internal::write_file(dir / "aspects.geojson", export_geojson_points(records));
  internal::write_file(dir / "cells.geojson", export_geojson_cells(bin_spatial(records, o.cell_size)));
  std::cerr << "analyze: " << records.size() << " aspect mentions from " << line_no
            << " reviews -> " << o.out_dir << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------

struct PlotOptions {
  std::string frequency;
  std::string out_dir = ".";
  size_t top_k = 10;
};

int run_plot(const PlotOptions &o) {
  if (o.top_k == 0) throw ConfigError("--top-k must be >= 1");
  for (const FrequencyTable &t : parse_frequency_csv(read_input(o.frequency))) {
    const std::string name = normalize_aspect(to_string(t.polarity));
    internal::write_file(fs::path(o.out_dir) / ("aspects_" + name + ".svg"),
                         frequency_bar_svg(t, "Top " + name + " aspects", o.top_k));
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// Flat key=value config file: each key is a long flag name. Keys for the
// global flags are injected before the subcommand, the rest right after
// it, so flags given explicitly on the command line take precedence.

const std::vector<std::string> kSubcommands = {"ingest", "convert", "train", "eval",
                                               "infer",  "analyze", "plot"};
const std::vector<std::string> kGlobalKeys = {"seed", "verbose"};

std::vector<std::string> expand_config(const std::vector<std::string> &args) {
  std::string config;
  for (size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) config = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) config = args[i].substr(9);
  }
  if (config.empty()) return args;
  std::ifstream in(config);
  if (!in) throw ConfigError("cannot open config file '" + config + "'");
  std::vector<std::string> global, local;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view t = internal::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const size_t eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(config + ":" + std::to_string(number) + ": expected key=value");
    }
    const std::string key(internal::trim(t.substr(0, eq)));
    const std::string value(internal::trim(t.substr(eq + 1)));
    if (key.empty()) throw ConfigError(config + ":" + std::to_string(number) + ": empty key");
    auto &dst = std::find(kGlobalKeys.begin(), kGlobalKeys.end(), key) != kGlobalKeys.end()
                    ? global
                    : local;
    dst.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out{args.front()};
  out.insert(out.end(), global.begin(), global.end());
  bool placed = false;
  for (size_t i = 1; i < args.size(); ++i) {
    out.push_back(args[i]);
    if (!placed && std::find(kSubcommands.begin(), kSubcommands.end(), args[i]) != kSubcommands.end()) {
      out.insert(out.end(), local.begin(), local.end());
      placed = true;
    }
  }
  return out;
}

int run(int argc, char **argv) {
  CLI::App app{"uabsa: aspect-based sentiment analysis for geo-located place reviews"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--config", g.config, "Flat key=value file of long-flag defaults");
  app.add_flag("--verbose,-v", g.verbose, "Progress output on stderr");

  IngestOptions ingest;
  auto *c_ingest = app.add_subcommand("ingest", "Collect places and reviews");
  c_ingest->add_option("--backend", ingest.backend)->check(CLI::IsMember({"fixture", "live"}))->capture_default_str();
  c_ingest->add_option("--fixtures", ingest.fixtures, "Fixture directory (fixture backend)");
  c_ingest->add_option("--out", ingest.out, "Output directory")->capture_default_str();
  c_ingest->add_option("--origin-lat", ingest.grid.origin.lat)->capture_default_str();
  c_ingest->add_option("--origin-lon", ingest.grid.origin.lon)->capture_default_str();
  c_ingest->add_option("--rows", ingest.grid.rows)->capture_default_str();
  c_ingest->add_option("--cols", ingest.grid.cols)->capture_default_str();
  c_ingest->add_option("--spacing-m", ingest.grid.spacing_m)->capture_default_str();
  c_ingest->add_option("--radius-m", ingest.grid.radius_m)->capture_default_str();
  c_ingest->add_option("--category", ingest.grid.category)->capture_default_str();
  c_ingest->add_option("--rate-limit", ingest.rate_limit, "Live requests per second")->capture_default_str();
  c_ingest->add_option("--max-reviews", ingest.max_reviews)->capture_default_str();
  c_ingest->add_option("--base-url", ingest.base_url)->capture_default_str();

  ConvertOptions convert;
  auto *c_convert = app.add_subcommand("convert", "Convert annotation files");
  c_convert->add_option("--from", convert.from)->check(CLI::IsMember({"apc", "atepc"}))->capture_default_str();
  c_convert->add_option("--to", convert.to)->check(CLI::IsMember({"apc", "atepc"}))->capture_default_str();
  c_convert->add_option("--input,-i", convert.input)->required();
  c_convert->add_option("--output,-o", convert.output)->capture_default_str();

  TrainOptions tr;
  auto *c_train = app.add_subcommand("train", "Train the LCF model");
  c_train->add_option("--data", tr.data, "ATEPC training corpus")->required();
  c_train->add_option("--out", tr.out, "Checkpoint path")->required();
  c_train->add_option("--log", tr.log, "History JSONL (default <out>.history.jsonl)");
  c_train->add_option("--test-out", tr.test_out, "Write the held-out split as ATEPC");
  c_train->add_option("--report", tr.report, "Write the final test metrics as JSON");
  c_train->add_option("--train-size", tr.train.train_size)->capture_default_str();
  c_train->add_option("--test-size", tr.train.test_size)->capture_default_str();
  c_train->add_option("--batch-size", tr.train.batch_size)->capture_default_str();
  c_train->add_option("--epochs", tr.train.num_epochs)->capture_default_str();
  c_train->add_option("--lr", tr.train.learning_rate)->capture_default_str();
  c_train->add_option("--tag-weight", tr.train.tag_loss_weight)->capture_default_str();
  c_train->add_option("--polarity-weight", tr.train.polarity_loss_weight)->capture_default_str();
  c_train->add_option("--d-model", tr.model.d_model)->capture_default_str();
  c_train->add_option("--heads", tr.model.n_heads)->capture_default_str();
  c_train->add_option("--layers", tr.model.n_layers)->capture_default_str();
  c_train->add_option("--ffn-dim", tr.model.ffn_dim, "0 = 2 * d-model")->capture_default_str();
  c_train->add_option("--max-len", tr.model.max_len)->capture_default_str();
  c_train->add_option("--alpha", tr.alpha, "SRD threshold, integer or 'inf'")->capture_default_str();
  c_train->add_option("--lcf-mode", tr.lcf_mode, "cdm, cdw or fusion")->capture_default_str();
  c_train->add_option("--dropout", tr.model.dropout)->capture_default_str();
  c_train->add_flag("--save-every-epoch", tr.save_every_epoch);

  EvalOptions ev;
  auto *c_eval = app.add_subcommand("eval", "Score a checkpoint on ATEPC data");
  c_eval->add_option("--checkpoint", ev.checkpoint);
  c_eval->add_option("--compare", ev.compare, "Additional checkpoints, one table row each");
  c_eval->add_option("--data", ev.data)->required();
  c_eval->add_option("--report", ev.report, "JSON report path ('-' for stdout)");
  c_eval->add_flag("--echo-oracle", ev.echo_oracle, "Score the gold annotation itself");

  InferOptions inf;
  auto *c_infer = app.add_subcommand("infer", "Extract aspects from reviews");
  c_infer->add_option("--checkpoint", inf.checkpoint)->required();
  c_infer->add_option("--input,-i", inf.input, "Text file, one review per line ('-' = stdin)")->capture_default_str();
  c_infer->add_option("--output,-o", inf.output)->capture_default_str();
  c_infer->add_option("--format", inf.format)->check(CLI::IsMember({"text", "jsonl"}))->capture_default_str();

  AnalyzeOptions an;
  auto *c_analyze = app.add_subcommand("analyze", "Aggregate predictions geographically");
  c_analyze->add_option("--predictions", an.predictions)->required();
  c_analyze->add_option("--reviews", an.reviews)->required();
  c_analyze->add_option("--out-dir", an.out_dir)->capture_default_str();
  c_analyze->add_option("--cell-size", an.cell_size, "Grid cell size in degrees")->capture_default_str();

  PlotOptions pl;
  auto *c_plot = app.add_subcommand("plot", "Bar charts of aspect frequencies");
  c_plot->add_option("--frequency", pl.frequency)->required();
  c_plot->add_option("--out-dir", pl.out_dir)->capture_default_str();
  c_plot->add_option("--top-k", pl.top_k)->capture_default_str();

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(args);
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  std::vector<char *> cargs;
  for (auto &a : args) cargs.push_back(a.data());
  try {
    app.parse(static_cast<int>(cargs.size()), cargs.data());
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest, g);
    if (c_convert->parsed()) return run_convert(convert);
    if (c_train->parsed()) return run_train(tr, g);
    if (c_eval->parsed()) {
      if (!ev.echo_oracle && ev.checkpoint.empty()) {
        throw ConfigError("--checkpoint is required unless --echo-oracle is given");
      }
      return run_eval(ev);
    }
    if (c_infer->parsed()) return run_infer(inf);
    if (c_analyze->parsed()) return run_analyze(an);
    if (c_plot->parsed()) return run_plot(pl);
  } catch (const CheckpointMissing &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoCheckpoint;
  } catch (const ConfigError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const ParseError &e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const BackendError &e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const NotFoundError &e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return c_ingest->parsed() ? kBackend : kConfig;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char **argv) { return run(argc, argv); }
