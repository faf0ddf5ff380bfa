// popcast: video popularity prediction from visual cues.
// Subcommands wire the pipeline end to end: synthetic data generation,
// descriptor extraction with caching, model training, k-fold evaluation and
// pre-publication ranking of candidate videos.
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "popcast/experiment.hpp"
#include "popcast/shallow.hpp"
#include "popcast/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace popcast;

namespace {

dataset::Date today_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  return {tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday};
}

void write_run_config(const fs::path& path, const json& config) {
  std::ofstream os(path);
  require(bool(os), "cannot write run config '" + path.string() + "'");
  os << config.dump() << "\n";
}

std::vector<features::Descriptor> parse_feature_names(
    const std::string& csv, bool* wants_external = nullptr) {
  std::vector<features::Descriptor> out;
  if (wants_external) *wants_external = false;
  std::size_t start = 0;
  while (start <= csv.size()) {
    std::size_t end = csv.find_first_of(",+", start);
    if (end == std::string::npos) end = csv.size();
    const std::string name = csv.substr(start, end - start);
    if (name == "hog")
      out.emplace_back(features::HogConfig{});
    else if (name == "gist")
      out.emplace_back(features::GistConfig{});
    else if (name == "external" && wants_external)
      *wants_external = true;
    else if (!name.empty())
      fail("unknown feature '" + name +
           "' (known: hog, gist" +
           std::string(wants_external ? ", external)" : ")"));
    start = end + 1;
  }
  return out;
}

// flag-value validators so bad names are usage errors, not runtime ones
const CLI::Validator FeatureListValidator(
    [](std::string& csv) {
      try {
        bool ext = false;
        parse_feature_names(csv, &ext);
      } catch (const std::exception& e) {
        return std::string(e.what());
      }
      return std::string();
    },
    "FEATURES");

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 0;
  std::string precision = "fast";
  std::string now_str;

  dataset::Date now() const {
    return now_str.empty() ? today_utc() : dataset::Date::parse(now_str);
  }
  void apply_threads() const {
#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif
  }
};

void add_global_options(CLI::App* cmd, GlobalOptions& g) {
  cmd->add_option("--seed", g.seed, "deterministic seed")
      ->envname("POPCAST_SEED");
  cmd->add_option("--threads", g.threads,
                  "worker threads for parallel kernels (0 = library default)");
  cmd->add_option("--precision", g.precision, "numeric precision for training")
      ->check(CLI::IsMember({"fast", "high"}));
  cmd->add_option("--now", g.now_str,
                  "reference date (YYYY-MM-DD) for ingestion age checks");
}

lrcn::LrcnConfig preset_config(const std::string& preset) {
  return preset == "paper" ? lrcn::LrcnConfig::paper()
                           : lrcn::LrcnConfig::mini();
}

struct TrainOverrides {
  std::optional<int> epochs, iterations, batch;
  std::optional<double> lr, momentum;
  std::optional<std::string> loss;

  void apply(lrcn::LrcnConfig& cfg) const {
    if (epochs) cfg.epochs = *epochs;
    if (iterations) cfg.iterations_per_epoch = *iterations;
    if (batch) cfg.batch_size = *batch;
    if (lr) cfg.lr = *lr;
    if (momentum) cfg.momentum = *momentum;
    if (loss)
      cfg.loss = *loss == "squared" ? lrcn::LossKind::squared
                                    : lrcn::LossKind::cross_entropy;
  }
};

void add_train_overrides(CLI::App* cmd, TrainOverrides& o) {
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--iterations", o.iterations, "iterations per epoch");
  cmd->add_option("--batch", o.batch, "batch size");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_option("--momentum", o.momentum, "sgd momentum");
  cmd->add_option("--loss", o.loss, "training loss")
      ->check(CLI::IsMember({"cross_entropy", "squared"}));
}

void write_loss_curve(const fs::path& path,
                      const std::vector<double>& curve) {
  std::ofstream os(path);
  require(bool(os), "cannot write loss curve '" + path.string() + "'");
  os << "iteration,loss\n";
  char buf[40];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto res = std::to_chars(buf, buf + sizeof buf, curve[i]);
    os << i << "," << std::string(buf, res.ptr) << "\n";
  }
}

// --- generate ---------------------------------------------------------------

int cmd_generate(const GlobalOptions& g, const fs::path& out, std::size_t n,
                 const std::string& cue, double noise, int frames, int height,
                 int width, bool force) {
  if (fs::exists(out) && !fs::is_empty(out) && !force) {
    std::cerr << "error: output directory '" << out.string()
              << "' exists and is not empty (use --force to overwrite)\n";
    return 1;
  }
  dataset::GenerateOptions opt;
  opt.out_dir = out;
  opt.n_videos = n;
  opt.cue = dataset::parse_cue(cue);
  opt.noise_level = noise;
  opt.seed = g.seed;
  opt.frames_per_video = frames;
  opt.frame_h = static_cast<std::size_t>(height);
  opt.frame_w = static_cast<std::size_t>(width);
  dataset::generate_synthetic(opt);

  json echo;
  echo["command"] = "generate";
  echo["n"] = n;
  echo["cue"] = cue;
  echo["noise"] = noise;
  echo["seed"] = g.seed;
  echo["frames"] = frames;
  echo["height"] = height;
  echo["width"] = width;
  write_run_config(out / "run_config.json", echo);
  std::cout << "generated " << n << " videos under " << out.string() << "\n";
  return 0;
}

// --- extract ----------------------------------------------------------------

int cmd_extract(const GlobalOptions& g, const fs::path& data,
                const std::string& feature_csv, const fs::path& cache_path,
                int frames) {
  const auto descriptors = parse_feature_names(feature_csv);
  require(!descriptors.empty(), "no features requested");
  const std::string want_id = features::fused_id(descriptors);

  eval::SampleSet samples =
      eval::load_samples(data / "manifest.jsonl", g.now(), frames);

  if (fs::exists(cache_path)) {
    const features::FeatureCache existing =
        features::load_feature_cache(cache_path);
    if (existing.descriptor_id == want_id &&
        existing.entries.size() == samples.records.size()) {
      bool all = true;
      for (std::size_t i = 0; i < samples.records.size(); ++i)
        if (existing.entries[i].first != samples.records[i].id) all = false;
      if (all) {
        std::cout << "cache hit: " << cache_path.string() << " ("
                  << existing.entries.size() << " videos, dim "
                  << existing.dim << ")\n";
        return 0;
      }
    }
  }

  features::FeatureCache cache;
  cache.descriptor_id = want_id;
  cache.dim = features::fused_dim(descriptors);
  cache.entries.resize(samples.records.size());
  const auto count = static_cast<std::ptrdiff_t>(samples.records.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    auto fused = features::video_features(samples.frames[i], descriptors);
    cache.entries[i] = {samples.records[i].id, std::move(fused.values)};
  }
  features::save_feature_cache(cache_path, cache);

  json echo;
  echo["command"] = "extract";
  echo["features"] = feature_csv;
  echo["frames"] = frames;
  echo["seed"] = g.seed;
  echo["descriptor_id"] = want_id;
  write_run_config(cache_path.string() + ".run.json", echo);
  std::cout << "cached " << cache.entries.size() << " vectors of dim "
            << cache.dim << " to " << cache_path.string() << "\n";
  return 0;
}

// --- train -------------------------------------------------------------------

int cmd_train(const GlobalOptions& g, const fs::path& data,
              const std::string& model_name, const std::string& preset,
              const fs::path& out, const TrainOverrides& overrides,
              const std::string& feature_csv, bool cluster_ack) {
  if (preset == "paper" && !cluster_ack) {
    std::cerr << "error: the paper preset trains 12 epochs of 30000 "
                 "iterations at 227x227 and is not desk-scale; pass "
                 "--i-have-a-cluster to proceed\n";
    return 2;
  }
  lrcn::LrcnConfig cfg = preset_config(preset);
  overrides.apply(cfg);
  cfg.seed = g.seed;

  eval::SampleSet samples = eval::load_samples(data / "manifest.jsonl",
                                               g.now(), cfg.frames_per_video);

  json echo;
  echo["command"] = "train";
  echo["model"] = model_name;
  echo["preset"] = preset;
  echo["seed"] = g.seed;
  echo["precision"] = g.precision;

  if (model_name == "lrcn") {
    std::vector<const FrameSequence*> videos;
    std::vector<int> labels;
    for (std::size_t i = 0; i < samples.records.size(); ++i) {
      videos.push_back(&samples.frames[i]);
      labels.push_back(samples.labels[i]);
    }
    lrcn::TrainResult tr;
    if (g.precision == "high") {
      Rng rng(cfg.seed);
      auto model = lrcn::build_model<double>(cfg, rng);
      tr = lrcn::train_model(model, videos, labels);
      lrcn::save_model(out, model);
    } else {
      Rng rng(cfg.seed);
      auto model = lrcn::build_model<float>(cfg, rng);
      tr = lrcn::train_model(model, videos, labels);
      lrcn::save_model(out, model);
    }
    write_loss_curve(out.string() + ".loss.csv", tr.loss_curve);
    echo["config"] = json::parse(cfg.to_json());
  } else {
    const auto descriptors = parse_feature_names(feature_csv);
    require(!descriptors.empty(), "no features requested");
    eval::FeatureStore store(samples);
    const auto& rows = store.fused(descriptors, nullptr);
    echo["features"] = feature_csv;
    if (model_name == "logreg") {
      std::vector<double> curve;
      const auto model = shallow::logreg_train(
          rows, samples.labels, shallow::kLogRegDefaultL2,
          shallow::kLogRegDefaultLr, shallow::kLogRegDefaultEpochs, g.seed,
          &curve);
      shallow::save_shallow_model(out, model);
      write_loss_curve(out.string() + ".loss.csv", curve);
    } else {  // svm
      std::vector<int> y;
      for (int l : samples.labels) y.push_back(l ? 1 : -1);
      const auto model = shallow::svm_train(
          rows, y, shallow::kSvmDefaultC, 1.0 / double(rows[0].size()),
          shallow::kSvmDefaultTol, shallow::kSvmDefaultMaxPasses, g.seed);
      if (!model.converged)
        std::cerr << "warning: smo did not converge within the pass budget\n";
      shallow::save_shallow_model(out, model);
    }
  }
  write_run_config(out.string() + ".run.json", echo);
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

// --- evaluate ----------------------------------------------------------------

struct ModelSpecEntry {
  std::string name;
  std::string features = "hog+gist";
};

std::vector<ModelSpecEntry> parse_models_spec(const std::string& spec) {
  std::vector<ModelSpecEntry> out;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t end = spec.find(',', start);
    if (end == std::string::npos) end = spec.size();
    std::string entry = spec.substr(start, end - start);
    if (!entry.empty()) {
      ModelSpecEntry e;
      const std::size_t colon = entry.find(':');
      e.name = entry.substr(0, colon);
      if (colon != std::string::npos) e.features = entry.substr(colon + 1);
      const bool known = e.name == "lrcn" || e.name == "logreg" ||
                         e.name == "svm" || e.name == "oracle" ||
                         e.name == "coinflip";
      require(known, "unknown model '" + e.name +
                         "' (known: lrcn, logreg, svm, oracle, coinflip)");
      out.push_back(std::move(e));
    }
    start = end + 1;
  }
  require(!out.empty(), "empty --models spec");
  return out;
}

int cmd_evaluate(const GlobalOptions& g, const fs::path& data,
                 const std::string& models_spec, int k, const fs::path& out,
                 const std::string& preset, const TrainOverrides& overrides,
                 const std::string& external_path, std::size_t external_dim,
                 bool cluster_ack, bool grid_search) {
  const auto entries = parse_models_spec(models_spec);
  if (preset == "paper" && !cluster_ack) {
    for (const auto& e : entries)
      if (e.name == "lrcn") {
        std::cerr << "error: evaluating lrcn at the paper preset is not "
                     "desk-scale; pass --i-have-a-cluster to proceed\n";
        return 2;
      }
  }

  lrcn::LrcnConfig cfg = preset_config(preset);
  overrides.apply(cfg);

  fs::create_directories(out);
  dataset::IngestResult ingest_log;
  eval::SampleSet samples = eval::load_samples(
      data / "manifest.jsonl", g.now(), cfg.frames_per_video, &ingest_log);
  dataset::write_rejection_log(out / "rejections.csv", ingest_log);

  std::map<std::string, features::FeatureVector> external;
  if (!external_path.empty()) {
    require(external_dim > 0,
            "--external-dim must be set with --external-features");
    external = features::load_external_features(external_path, external_dim);
  }

  eval::FeatureStore store(samples);
  std::vector<std::shared_ptr<eval::ModelDriver>> drivers;
  for (const auto& e : entries) {
    if (e.name == "lrcn") {
      drivers.push_back(eval::make_lrcn_driver(cfg, g.precision == "high"));
    } else if (e.name == "oracle") {
      drivers.push_back(eval::make_oracle_driver());
    } else if (e.name == "coinflip") {
      drivers.push_back(eval::make_coinflip_driver());
    } else {
      bool wants_external = false;
      auto descriptors = parse_feature_names(e.features, &wants_external);
      require(!descriptors.empty() || wants_external,
              "model '" + e.name + "' has no features");
      const auto* ext = wants_external ? &external : nullptr;
      if (wants_external)
        require(!external.empty(),
                "model spec requests external features; pass "
                "--external-features and --external-dim");
      eval::ShallowHyper hyper;
      hyper.grid_search = grid_search;
      if (e.name == "logreg")
        drivers.push_back(
            eval::make_logreg_driver(store, std::move(descriptors), ext,
                                     hyper));
      else
        drivers.push_back(
            eval::make_svm_driver(store, std::move(descriptors), ext, hyper));
    }
  }

  const auto report = eval::run_experiment(samples, drivers, k, g.seed);

  json echo;
  echo["command"] = "evaluate";
  echo["models"] = models_spec;
  echo["k"] = k;
  echo["seed"] = g.seed;
  echo["preset"] = preset;
  echo["precision"] = g.precision;
  echo["grid_search"] = grid_search;
  echo["lrcn_config"] = json::parse(cfg.to_json());
  write_run_config(out / "run_config.json", echo);

  eval::write_results_csv(report, out / "results.csv");
  eval::write_results_json(report, echo.dump(), out / "results.json");
  const std::string table = eval::format_table(report);
  std::ofstream(out / "table.txt") << table;
  std::cout << table;
  for (const auto& m : report.models)
    if (m.failed)
      std::cerr << "model " << m.model << " failed: " << m.error << "\n";
  return 0;
}

// --- rank ---------------------------------------------------------------------

int cmd_rank(const fs::path& model_path, const fs::path& candidates_dir,
             int top, const fs::path& out) {
  const Checkpoint checkpoint = load_checkpoint(model_path);
  const lrcn::LrcnConfig cfg = lrcn::config_from_checkpoint(checkpoint);

  struct Ranked {
    std::string id;
    double prob;
  };
  std::vector<std::string> ids;
  require(fs::is_directory(candidates_dir),
          "candidates directory '" + candidates_dir.string() +
              "' does not exist");
  for (const auto& entry : fs::directory_iterator(candidates_dir))
    if (entry.is_directory() &&
        !dataset::list_frames(entry.path()).empty())
      ids.push_back(entry.path().filename().string());
  std::sort(ids.begin(), ids.end());
  if (ids.empty()) {
    std::cerr << "error: no candidate videos with frames under '"
              << candidates_dir.string() << "'\n";
    return 1;
  }

  std::vector<Ranked> ranked(ids.size());
  const auto count = static_cast<std::ptrdiff_t>(ids.size());
  if (lrcn::checkpoint_is_double(checkpoint)) {
    const auto model = lrcn::model_from_checkpoint<double>(checkpoint);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      dataset::VideoRecord rec;
      rec.id = ids[i];
      rec.frames_dir = candidates_dir / ids[i];
      const auto frames =
          dataset::load_video_frames(rec, cfg.frames_per_video);
      ranked[i] = {ids[i], lrcn::predict(model, frames).probs[1]};
    }
  } else {
    const auto model = lrcn::model_from_checkpoint<float>(checkpoint);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      dataset::VideoRecord rec;
      rec.id = ids[i];
      rec.frames_dir = candidates_dir / ids[i];
      const auto frames =
          dataset::load_video_frames(rec, cfg.frames_per_video);
      ranked[i] = {ids[i], lrcn::predict(model, frames).probs[1]};
    }
  }

  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.prob != b.prob) return a.prob > b.prob;
    return a.id < b.id;
  });
  if (top > 0 && static_cast<std::size_t>(top) < ranked.size())
    ranked.resize(top);

  std::ostringstream listing;
  listing << "rank,id,p_popular\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    char buf[40];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, ranked[i].prob);
    listing << (i + 1) << "," << ranked[i].id << ","
            << std::string(buf, res.ptr) << "\n";
  }
  std::cout << listing.str();
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream(out / "ranking.csv") << listing.str();
    json echo;
    echo["command"] = "rank";
    echo["top"] = top;
    write_run_config(out / "run_config.json", echo);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"video popularity prediction from visual cues"};
  app.require_subcommand(1);

  GlobalOptions g;

  // generate
  auto* generate = app.add_subcommand(
      "generate", "write a synthetic labeled video dataset");
  std::string gen_out, gen_cue = "brightness_trend";
  std::size_t gen_n = 0;
  double gen_noise = 0.0;
  int gen_frames = 6, gen_height = 40, gen_width = 40;
  bool gen_force = false;
  generate->add_option("--out", gen_out, "output directory")->required();
  generate->add_option("--n", gen_n, "number of videos (>= 4)")
      ->required()
      ->check(CLI::Range(std::size_t{4}, std::size_t{10000000}));
  generate->add_option("--cue", gen_cue, "class cue")
      ->check(CLI::IsMember(
          {"brightness_trend", "static_brightness", "noise"}));
  generate->add_option("--noise", gen_noise, "noise level")
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--frames", gen_frames, "frames per video");
  generate->add_option("--height", gen_height, "source frame height");
  generate->add_option("--width", gen_width, "source frame width");
  generate->add_flag("--force", gen_force, "overwrite a non-empty directory");
  add_global_options(generate, g);

  // extract
  auto* extract = app.add_subcommand(
      "extract", "compute and cache per-video visual descriptors");
  std::string ext_data, ext_features = "hog,gist", ext_cache;
  int ext_frames = 6;
  extract->add_option("--data", ext_data, "dataset directory")->required();
  extract->add_option("--features", ext_features, "comma list: hog,gist")
      ->check(FeatureListValidator);
  extract->add_option("--cache", ext_cache, "cache file to write")->required();
  extract->add_option("--frames", ext_frames, "frames sampled per video");
  add_global_options(extract, g);

  // train
  auto* train = app.add_subcommand("train", "train a model on a dataset");
  std::string tr_data, tr_model, tr_preset = "mini", tr_out,
              tr_features = "hog,gist";
  bool tr_cluster = false;
  TrainOverrides tr_overrides;
  train->add_option("--data", tr_data, "dataset directory")->required();
  train->add_option("--model", tr_model, "model kind")
      ->required()
      ->check(CLI::IsMember({"lrcn", "logreg", "svm"}));
  train->add_option("--preset", tr_preset, "network preset")
      ->check(CLI::IsMember({"mini", "paper"}));
  train->add_option("--out", tr_out, "model file to write")->required();
  train->add_option("--features", tr_features,
                    "features for shallow models (comma list)")
      ->check(FeatureListValidator);
  train->add_flag("--i-have-a-cluster", tr_cluster,
                  "acknowledge the paper-scale training budget");
  add_train_overrides(train, tr_overrides);
  add_global_options(train, g);

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "k-fold train/test comparison of models");
  std::string ev_data, ev_models = "lrcn,logreg:hog+gist,svm:hog+gist",
              ev_out, ev_preset = "mini", ev_ext_path;
  int ev_k = 5;
  std::size_t ev_ext_dim = 0;
  bool ev_cluster = false, ev_grid = false;
  TrainOverrides ev_overrides;
  evaluate->add_option("--data", ev_data, "dataset directory")->required();
  evaluate->add_option("--models", ev_models,
                       "comma list of model[:features] entries")
      ->check(CLI::Validator(
          [](std::string& spec) {
            try {
              for (const auto& e : parse_models_spec(spec))
                if (e.name == "logreg" || e.name == "svm") {
                  bool ext = false;
                  parse_feature_names(e.features, &ext);
                }
            } catch (const std::exception& e) {
              return std::string(e.what());
            }
            return std::string();
          },
          "MODELS"));
  evaluate->add_option("--k", ev_k, "number of folds")
      ->check(CLI::Range(2, 1000));
  evaluate->add_option("--out", ev_out, "results directory")->required();
  evaluate->add_option("--preset", ev_preset, "lrcn preset")
      ->check(CLI::IsMember({"mini", "paper"}));
  evaluate->add_option("--external-features", ev_ext_path,
                       "csv of precomputed per-video vectors");
  evaluate->add_option("--external-dim", ev_ext_dim,
                       "dimension of external vectors");
  evaluate->add_flag("--i-have-a-cluster", ev_cluster,
                     "acknowledge the paper-scale training budget");
  evaluate->add_flag("--grid-search", ev_grid,
                     "sweep shallow hyperparameters on a held-out fifth of "
                     "each training fold");
  add_train_overrides(evaluate, ev_overrides);
  add_global_options(evaluate, g);

  // rank
  auto* rank = app.add_subcommand(
      "rank", "order candidate videos by predicted popularity");
  std::string rk_model, rk_candidates, rk_out;
  int rk_top = 0;
  rank->add_option("--model", rk_model, "trained lrcn checkpoint")->required();
  rank->add_option("--candidates", rk_candidates,
                   "directory of per-video frame directories")
      ->required();
  rank->add_option("--top", rk_top, "print only the top N");
  rank->add_option("--out", rk_out, "optional output directory");
  add_global_options(rank, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  g.apply_threads();
  try {
    if (generate->parsed())
      return cmd_generate(g, gen_out, gen_n, gen_cue, gen_noise, gen_frames,
                          gen_height, gen_width, gen_force);
    if (extract->parsed())
      return cmd_extract(g, ext_data, ext_features, ext_cache, ext_frames);
    if (train->parsed())
      return cmd_train(g, tr_data, tr_model, tr_preset, tr_out, tr_overrides,
                       tr_features, tr_cluster);
    if (evaluate->parsed())
      return cmd_evaluate(g, ev_data, ev_models, ev_k, ev_out, ev_preset,
                          ev_overrides, ev_ext_path, ev_ext_dim, ev_cluster,
                          ev_grid);
    if (rank->parsed()) return cmd_rank(rk_model, rk_candidates, rk_top, rk_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
