#include "popcast/experiment.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "popcast/detail/binio.hpp"
#include "popcast/error.hpp"
#include "popcast/shallow.hpp"

namespace popcast::eval {

using nlohmann::json;

namespace {

// shortest round-trip decimal form, deterministic across runs
std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::pair<double, double> mean_and_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double mean = 0;
  for (double x : v) mean += x;
  mean /= double(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / double(v.size() - 1))};
}

}  // namespace

SampleSet load_samples(const std::filesystem::path& manifest_path,
                       dataset::Date now, int frames_per_video,
                       dataset::IngestResult* ingest_log) {
  dataset::IngestResult ingest = dataset::ingest_manifest(manifest_path, now);
  require(!ingest.accepted.empty(),
          "load_samples: no valid records in '" + manifest_path.string() +
              "'");
  SampleSet data;
  data.records = ingest.accepted;
  data.scores.reserve(data.records.size());
  for (const auto& rec : data.records)
    data.scores.push_back(
        dataset::normalized_score(rec.viewcount, rec.followers));
  data.labels = dataset::median_split(data.scores);

  data.frames.resize(data.records.size());
  const auto count = static_cast<std::ptrdiff_t>(data.records.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (std::ptrdiff_t i = 0; i < count; ++i)
    data.frames[i] =
        dataset::load_video_frames(data.records[i], frames_per_video);

  if (ingest_log) *ingest_log = std::move(ingest);
  return data;
}

std::vector<dataset::LabeledSample> labeled_samples(const SampleSet& data) {
  std::vector<dataset::LabeledSample> out;
  out.reserve(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i)
    out.push_back({data.records[i], data.scores[i], data.labels[i]});
  return out;
}

// --- feature store -----------------------------------------------------------

const std::vector<std::vector<double>>& FeatureStore::fused(
    const std::vector<features::Descriptor>& descriptors,
    const std::map<std::string, features::FeatureVector>* external) {
  std::string key;
  for (const auto& d : descriptors)
    key += std::visit([](const auto& c) { return c.id(); }, d) + "+";
  if (external) key += "external";
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;

  const auto count = static_cast<std::ptrdiff_t>(data_.records.size());
  std::vector<std::vector<double>> rows(count);
  if (!descriptors.empty()) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i)
      rows[i] = features::video_features(data_.frames[i], descriptors).values;
  }
  if (external) {
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const auto found = external->find(data_.records[i].id);
      require(found != external->end(),
              "external features: no row for video '" + data_.records[i].id +
                  "'");
      rows[i].insert(rows[i].end(), found->second.values.begin(),
                     found->second.values.end());
    }
  }
  return cache_.emplace(std::move(key), std::move(rows)).first->second;
}

// --- drivers ----------------------------------------------------------------

namespace {

std::string descriptors_desc(
    const std::vector<features::Descriptor>& descriptors, bool external) {
  std::string out;
  for (const auto& d : descriptors) {
    if (!out.empty()) out += "+";
    out += std::holds_alternative<features::HogConfig>(d) ? "hog" : "gist";
  }
  if (external) out += out.empty() ? "external" : "+external";
  return out;
}

class LrcnDriver : public ModelDriver {
 public:
  LrcnDriver(const lrcn::LrcnConfig& config, bool high_precision)
      : config_(config), high_(high_precision) {}

  std::string name() const override { return "lrcn"; }
  std::string features_desc() const override { return "raw frames"; }

  void fit(const SampleSet& data, const std::vector<int>& train_idx,
           std::uint64_t seed) override {
    lrcn::LrcnConfig cfg = config_;
    cfg.seed = seed;
    std::vector<const FrameSequence*> videos;
    std::vector<int> labels;
    videos.reserve(train_idx.size());
    for (int i : train_idx) {
      videos.push_back(&data.frames[i]);
      labels.push_back(data.labels[i]);
    }
    if (high_) {
      Rng rng(seed);
      model_d_ = lrcn::build_model<double>(cfg, rng);
      lrcn::train_model(*model_d_, videos, labels);
    } else {
      Rng rng(seed);
      model_f_ = lrcn::build_model<float>(cfg, rng);
      lrcn::train_model(*model_f_, videos, labels);
    }
  }

  std::vector<double> predict_popular(const SampleSet& data,
                                      const std::vector<int>& idx) override {
    std::vector<double> out(idx.size());
    const auto count = static_cast<std::ptrdiff_t>(idx.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      const FrameSequence& frames = data.frames[idx[i]];
      out[i] = high_ ? lrcn::predict(*model_d_, frames).probs[1]
                     : lrcn::predict(*model_f_, frames).probs[1];
    }
    return out;
  }

 private:
  lrcn::LrcnConfig config_;
  bool high_;
  std::optional<lrcn::Model<float>> model_f_;
  std::optional<lrcn::Model<double>> model_d_;
};

class LogRegDriver : public ModelDriver {
 public:
  LogRegDriver(FeatureStore& store,
               std::vector<features::Descriptor> descriptors,
               const std::map<std::string, features::FeatureVector>* external,
               const ShallowHyper& hyper)
      : store_(store), descriptors_(std::move(descriptors)),
        external_(external), hyper_(hyper) {}

  std::string name() const override { return "logreg"; }
  std::string features_desc() const override {
    return descriptors_desc(descriptors_, external_ != nullptr);
  }

  void fit(const SampleSet& data, const std::vector<int>& train_idx,
           std::uint64_t seed) override {
    const auto& rows = store_.fused(descriptors_, external_);
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    x.reserve(train_idx.size());
    for (int i : train_idx) {
      x.push_back(rows[i]);
      y.push_back(data.labels[i]);
    }
    double l2 = hyper_.logreg_l2;
    if (hyper_.grid_search)
      l2 = pick_l2(x, y, seed);
    model_ = shallow::logreg_train(x, y, l2, hyper_.logreg_lr,
                                   hyper_.logreg_epochs, seed);
  }

  double pick_l2(const std::vector<std::vector<double>>& x,
                 const std::vector<int>& y, std::uint64_t seed) const {
    const auto inner = dataset::kfold_split(x.size(), 5, seed ^ 0x9e37);
    std::vector<std::vector<double>> xt, xv;
    std::vector<int> yt, yv;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool val = inner.assignment[i] == 0;
      (val ? xv : xt).push_back(x[i]);
      (val ? yv : yt).push_back(y[i]);
    }
    double best_l2 = hyper_.logreg_l2, best_acc = -1.0;
    for (double cand : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
      const auto m = shallow::logreg_train(xt, yt, cand, hyper_.logreg_lr,
                                           hyper_.logreg_epochs, seed);
      int hits = 0;
      for (std::size_t i = 0; i < xv.size(); ++i)
        hits += (shallow::logreg_predict_proba(m, xv[i])[1] >= 0.5) == yv[i];
      const double acc = double(hits) / double(xv.size());
      if (acc > best_acc) {
        best_acc = acc;
        best_l2 = cand;
      }
    }
    return best_l2;
  }

  std::vector<double> predict_popular(const SampleSet& data,
                                      const std::vector<int>& idx) override {
    (void)data;
    const auto& rows = store_.fused(descriptors_, external_);
    std::vector<double> out;
    out.reserve(idx.size());
    for (int i : idx)
      out.push_back(shallow::logreg_predict_proba(*model_, rows[i])[1]);
    return out;
  }

 private:
  FeatureStore& store_;
  std::vector<features::Descriptor> descriptors_;
  const std::map<std::string, features::FeatureVector>* external_;
  ShallowHyper hyper_;
  std::optional<shallow::LogRegModel> model_;
};

class SvmDriver : public ModelDriver {
 public:
  SvmDriver(FeatureStore& store, std::vector<features::Descriptor> descriptors,
            const std::map<std::string, features::FeatureVector>* external,
            const ShallowHyper& hyper)
      : store_(store), descriptors_(std::move(descriptors)),
        external_(external), hyper_(hyper) {}

  std::string name() const override { return "svm"; }
  std::string features_desc() const override {
    return descriptors_desc(descriptors_, external_ != nullptr);
  }

  void fit(const SampleSet& data, const std::vector<int>& train_idx,
           std::uint64_t seed) override {
    const auto& rows = store_.fused(descriptors_, external_);
    std::vector<std::vector<double>> x;
    std::vector<int> y;  // dataset labels {0,1} map to {-1,+1} and back
    x.reserve(train_idx.size());
    for (int i : train_idx) {
      x.push_back(rows[i]);
      y.push_back(data.labels[i] ? 1 : -1);
    }
    double c_param = hyper_.svm_c;
    double gamma =
        hyper_.svm_gamma > 0 ? hyper_.svm_gamma : 1.0 / double(x[0].size());
    if (hyper_.grid_search) pick_c_gamma(x, y, seed, c_param, gamma);
    model_ = shallow::svm_train(x, y, c_param, gamma, hyper_.svm_tol,
                                hyper_.svm_max_passes, seed);
  }

  void pick_c_gamma(const std::vector<std::vector<double>>& x,
                    const std::vector<int>& y, std::uint64_t seed,
                    double& c_param, double& gamma) const {
    const auto inner = dataset::kfold_split(x.size(), 5, seed ^ 0x9e37);
    std::vector<std::vector<double>> xt, xv;
    std::vector<int> yt, yv;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const bool val = inner.assignment[i] == 0;
      (val ? xv : xt).push_back(x[i]);
      (val ? yv : yt).push_back(y[i]);
    }
    const double base_gamma = 1.0 / double(x[0].size());
    double best_acc = -1.0;
    for (double c_cand : {0.3, 1.0, 3.0})
      for (double mult : {0.5, 1.0, 2.0}) {
        const auto m = shallow::svm_train(xt, yt, c_cand, mult * base_gamma,
                                          hyper_.svm_tol,
                                          hyper_.svm_max_passes, seed);
        int hits = 0;
        for (std::size_t i = 0; i < xv.size(); ++i)
          hits += (shallow::svm_predict_proba(m, xv[i])[1] >= 0.5) ==
                  (yv[i] > 0);
        const double acc = double(hits) / double(xv.size());
        if (acc > best_acc) {
          best_acc = acc;
          c_param = c_cand;
          gamma = mult * base_gamma;
        }
      }
  }

  std::vector<double> predict_popular(const SampleSet& data,
                                      const std::vector<int>& idx) override {
    (void)data;
    const auto& rows = store_.fused(descriptors_, external_);
    std::vector<double> out;
    out.reserve(idx.size());
    for (int i : idx)
      out.push_back(shallow::svm_predict_proba(*model_, rows[i])[1]);
    return out;
  }

 private:
  FeatureStore& store_;
  std::vector<features::Descriptor> descriptors_;
  const std::map<std::string, features::FeatureVector>* external_;
  ShallowHyper hyper_;
  std::optional<shallow::SvmModel> model_;
};

class OracleDriver : public ModelDriver {
 public:
  std::string name() const override { return "oracle"; }
  std::string features_desc() const override { return "true labels"; }
  void fit(const SampleSet&, const std::vector<int>&, std::uint64_t) override {}
  std::vector<double> predict_popular(const SampleSet& data,
                                      const std::vector<int>& idx) override {
    std::vector<double> out;
    for (int i : idx) out.push_back(static_cast<double>(data.labels[i]));
    return out;
  }
};

class CoinFlipDriver : public ModelDriver {
 public:
  std::string name() const override { return "coinflip"; }
  std::string features_desc() const override { return "none"; }
  void fit(const SampleSet&, const std::vector<int>&,
           std::uint64_t seed) override {
    seed_ = seed;
  }
  std::vector<double> predict_popular(const SampleSet& data,
                                      const std::vector<int>& idx) override {
    (void)data;
    Rng rng(seed_);
    std::vector<double> out;
    for (std::size_t i = 0; i < idx.size(); ++i) out.push_back(rng.uniform());
    return out;
  }

 private:
  std::uint64_t seed_ = 0;
};

}  // namespace

std::unique_ptr<ModelDriver> make_lrcn_driver(const lrcn::LrcnConfig& config,
                                              bool high_precision) {
  return std::make_unique<LrcnDriver>(config, high_precision);
}
std::unique_ptr<ModelDriver> make_logreg_driver(
    FeatureStore& store, std::vector<features::Descriptor> descriptors,
    const std::map<std::string, features::FeatureVector>* external,
    const ShallowHyper& hyper) {
  return std::make_unique<LogRegDriver>(store, std::move(descriptors),
                                        external, hyper);
}
std::unique_ptr<ModelDriver> make_svm_driver(
    FeatureStore& store, std::vector<features::Descriptor> descriptors,
    const std::map<std::string, features::FeatureVector>* external,
    const ShallowHyper& hyper) {
  return std::make_unique<SvmDriver>(store, std::move(descriptors), external,
                                     hyper);
}
std::unique_ptr<ModelDriver> make_oracle_driver() {
  return std::make_unique<OracleDriver>();
}
std::unique_ptr<ModelDriver> make_coinflip_driver() {
  return std::make_unique<CoinFlipDriver>();
}

// --- report -------------------------------------------------------------------

namespace {
std::vector<double> collect(const std::vector<FoldMetrics>& folds,
                            double FoldMetrics::*member) {
  std::vector<double> out;
  out.reserve(folds.size());
  for (const auto& f : folds) out.push_back(f.*member);
  return out;
}
}  // namespace

double ModelReport::accuracy_mean() const {
  return mean_and_std(collect(folds, &FoldMetrics::accuracy)).first;
}
double ModelReport::accuracy_std() const {
  return mean_and_std(collect(folds, &FoldMetrics::accuracy)).second;
}
double ModelReport::spearman_mean() const {
  return mean_and_std(collect(folds, &FoldMetrics::spearman)).first;
}
double ModelReport::spearman_std() const {
  return mean_and_std(collect(folds, &FoldMetrics::spearman)).second;
}

ExperimentReport run_experiment(
    const SampleSet& data,
    const std::vector<std::shared_ptr<ModelDriver>>& models, int k,
    std::uint64_t seed) {
  require(!models.empty(), "run_experiment: no models");
  const std::size_t n = data.records.size();
  const dataset::FoldSplit split = dataset::kfold_split(n, k, seed);

  ExperimentReport report;
  report.k = k;
  report.seed = seed;
  report.sample_count = n;
  std::string fp;
  for (int a : split.assignment) fp += static_cast<char>('0' + a);
  report.fold_fingerprint = detail::hex64(detail::fnv1a(fp));

  for (const auto& model : models) {
    ModelReport mr;
    mr.model = model->name();
    mr.features = model->features_desc();
    try {
      for (int fold = 0; fold < k; ++fold) {
        const auto train_idx = split.train_indices(fold);
        const auto test_idx = split.test_indices(fold);
        const std::uint64_t fold_seed = Rng(seed).fork(40, fold).next_u64();
        model->fit(data, train_idx, fold_seed);
        const std::vector<double> probs =
            model->predict_popular(data, test_idx);

        std::vector<int> predicted, truth;
        std::vector<double> targets;
        for (std::size_t i = 0; i < test_idx.size(); ++i) {
          predicted.push_back(probs[i] >= 0.5 ? 1 : 0);
          truth.push_back(data.labels[test_idx[i]]);
          targets.push_back(data.scores[test_idx[i]]);
        }
        FoldMetrics fm;
        fm.accuracy = accuracy(predicted, truth);
        const SpearmanResult sr = spearman(probs, targets);
        fm.spearman = sr.rho;
        fm.spearman_degenerate = sr.degenerate;
        mr.folds.push_back(fm);
      }
    } catch (const std::exception& e) {
      mr.failed = true;
      mr.error = e.what();
      mr.folds.clear();
    }
    report.models.push_back(std::move(mr));
  }
  return report;
}

void write_results_csv(const ExperimentReport& report,
                       const std::filesystem::path& path) {
  std::ofstream os(path);
  require(bool(os), "cannot open results csv '" + path.string() + "'");
  os << "model,fold,accuracy,spearman\n";
  for (const auto& m : report.models) {
    for (std::size_t f = 0; f < m.folds.size(); ++f)
      os << m.model << "," << f << "," << fmt_double(m.folds[f].accuracy)
         << "," << fmt_double(m.folds[f].spearman) << "\n";
    if (m.failed) {
      os << m.model << ",failed,nan,nan\n";
      continue;
    }
    os << m.model << ",mean," << fmt_double(m.accuracy_mean()) << ","
       << fmt_double(m.spearman_mean()) << "\n";
    os << m.model << ",std," << fmt_double(m.accuracy_std()) << ","
       << fmt_double(m.spearman_std()) << "\n";
  }
}

void write_results_json(const ExperimentReport& report,
                        const std::string& run_config_json,
                        const std::filesystem::path& path) {
  json j;
  j["k"] = report.k;
  j["seed"] = report.seed;
  j["samples"] = report.sample_count;
  j["fold_fingerprint"] = report.fold_fingerprint;
  if (!run_config_json.empty()) {
    j["run_config"] = json::parse(run_config_json);
    j["config_hash"] = detail::hex64(detail::fnv1a(run_config_json));
  }
  json models = json::array();
  for (const auto& m : report.models) {
    json jm;
    jm["model"] = m.model;
    jm["features"] = m.features;
    jm["failed"] = m.failed;
    if (m.failed) {
      jm["error"] = m.error;
    } else {
      json folds = json::array();
      for (const auto& f : m.folds)
        folds.push_back({{"accuracy", f.accuracy},
                         {"spearman", f.spearman},
                         {"spearman_degenerate", f.spearman_degenerate}});
      jm["folds"] = folds;
      jm["accuracy_mean"] = m.accuracy_mean();
      jm["accuracy_std"] = m.accuracy_std();
      jm["spearman_mean"] = m.spearman_mean();
      jm["spearman_std"] = m.spearman_std();
    }
    models.push_back(jm);
  }
  j["models"] = models;
  std::ofstream os(path);
  require(bool(os), "cannot open results json '" + path.string() + "'");
  os << j.dump(2) << "\n";
}

std::string format_table(const ExperimentReport& report) {
  std::ostringstream os;
  auto pm = [](double mean, double sd) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(3);
    s << mean << " +/- " << sd;
    return s.str();
  };
  os << "model       features          accuracy            spearman\n";
  os << "---------------------------------------------------------------\n";
  for (const auto& m : report.models) {
    std::string acc = m.failed ? "failed" : pm(m.accuracy_mean(),
                                               m.accuracy_std());
    std::string sp = m.failed ? "failed" : pm(m.spearman_mean(),
                                              m.spearman_std());
    os << m.model << std::string(m.model.size() < 12 ? 12 - m.model.size() : 1,
                                 ' ')
       << m.features
       << std::string(m.features.size() < 18 ? 18 - m.features.size() : 1, ' ')
       << acc << std::string(acc.size() < 20 ? 20 - acc.size() : 1, ' ') << sp
       << "\n";
  }
  return os.str();
}

}  // namespace popcast::eval
