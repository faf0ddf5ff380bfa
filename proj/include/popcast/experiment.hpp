#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "popcast/dataset.hpp"
#include "popcast/features.hpp"
#include "popcast/lrcn.hpp"
#include "popcast/metrics.hpp"

namespace popcast::eval {

// labeled dataset held in memory: records, normalized scores, median-split
// labels and the sampled source-size frame sequences
struct SampleSet {
  std::vector<dataset::VideoRecord> records;
  std::vector<double> scores;
  std::vector<int> labels;
  std::vector<FrameSequence> frames;
};

SampleSet load_samples(const std::filesystem::path& manifest_path,
                       dataset::Date now, int frames_per_video,
                       dataset::IngestResult* ingest_log = nullptr);

std::vector<dataset::LabeledSample> labeled_samples(const SampleSet& data);

// per-video fused descriptors, computed once and shared across folds and
// models (descriptors are pure per-video functions, so nothing leaks)
class FeatureStore {
 public:
  explicit FeatureStore(const SampleSet& data) : data_(data) {}

  const std::vector<std::vector<double>>& fused(
      const std::vector<features::Descriptor>& descriptors,
      const std::map<std::string, features::FeatureVector>* external);

 private:
  const SampleSet& data_;
  std::map<std::string, std::vector<std::vector<double>>> cache_;
};

class ModelDriver {
 public:
  virtual ~ModelDriver() = default;
  virtual std::string name() const = 0;
  virtual std::string features_desc() const = 0;
  virtual void fit(const SampleSet& data, const std::vector<int>& train_idx,
                   std::uint64_t seed) = 0;
  virtual std::vector<double> predict_popular(
      const SampleSet& data, const std::vector<int>& idx) = 0;
};

struct ShallowHyper {
  double logreg_l2 = 1e-4;
  double logreg_lr = 0.1;
  int logreg_epochs = 300;
  double svm_c = 1.0;
  double svm_gamma = 0.0;  // 0 means 1/dim
  double svm_tol = 1e-3;
  int svm_max_passes = 400;
  // hold out a fifth of the training fold and sweep a small grid
  // (logreg: l2; svm: C and gamma) before refitting on the whole fold
  bool grid_search = false;
};

std::unique_ptr<ModelDriver> make_lrcn_driver(const lrcn::LrcnConfig& config,
                                              bool high_precision);
std::unique_ptr<ModelDriver> make_logreg_driver(
    FeatureStore& store, std::vector<features::Descriptor> descriptors,
    const std::map<std::string, features::FeatureVector>* external,
    const ShallowHyper& hyper);
std::unique_ptr<ModelDriver> make_svm_driver(
    FeatureStore& store, std::vector<features::Descriptor> descriptors,
    const std::map<std::string, features::FeatureVector>* external,
    const ShallowHyper& hyper);
// diagnostic plumbing: reads the true labels / flips seeded coins
std::unique_ptr<ModelDriver> make_oracle_driver();
std::unique_ptr<ModelDriver> make_coinflip_driver();

// --- k-fold experiment ------------------------------------------------------

struct FoldMetrics {
  double accuracy = 0.0;
  double spearman = 0.0;
  bool spearman_degenerate = false;
};

struct ModelReport {
  std::string model, features;
  bool failed = false;
  std::string error;
  std::vector<FoldMetrics> folds;

  double accuracy_mean() const;
  double accuracy_std() const;
  double spearman_mean() const;
  double spearman_std() const;
};

struct ExperimentReport {
  int k = 0;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  std::string fold_fingerprint;
  std::vector<ModelReport> models;
};

// One fold split, fixed by the seed and shared by every model (paired
// comparison). A model that throws is marked failed; the rest continue.
ExperimentReport run_experiment(
    const SampleSet& data,
    const std::vector<std::shared_ptr<ModelDriver>>& models, int k,
    std::uint64_t seed);

// model,fold,accuracy,spearman rows plus mean/std aggregate rows
void write_results_csv(const ExperimentReport& report,
                       const std::filesystem::path& path);
void write_results_json(const ExperimentReport& report,
                        const std::string& run_config_json,
                        const std::filesystem::path& path);
std::string format_table(const ExperimentReport& report);

}  // namespace popcast::eval
