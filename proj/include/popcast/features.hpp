#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "popcast/image.hpp"

namespace popcast::features {

struct FeatureVector {
  std::vector<double> values;
  std::string descriptor_id;  // name + config hash
};

// Histogram of oriented gradients. The default configuration produces the
// classic 8100-dimensional descriptor: 128x128 input, 8px cells, 2x2-cell
// blocks at stride 1, 9 unsigned bins -> 15*15*4*9.
struct HogConfig {
  std::size_t resize_h = 128, resize_w = 128;
  int cell = 8;
  int block = 2;
  int block_stride = 1;
  int bins = 9;
  bool signed_grad = false;
  double epsilon = 1e-6;

  std::size_t blocks_y() const;
  std::size_t blocks_x() const;
  std::size_t dim() const;
  std::string id() const;
};

// Holistic scene descriptor: oriented band-pass filtering in the frequency
// domain, magnitudes averaged over a spatial grid. The default color
// configuration produces 960 values: 4x4 grid, 4 scales x 5 orientations,
// 3 channels.
struct GistConfig {
  std::size_t resize_h = 128, resize_w = 128;
  int grid = 4;
  std::vector<int> orientations_per_scale = {5, 5, 5, 5};
  bool color = true;

  std::size_t filter_count() const;
  std::size_t dim() const;
  std::string id() const;
};

FeatureVector hog(const Image& image, const HogConfig& config);
FeatureVector gist(const Image& image, const GistConfig& config);

// concatenation in the given order; the id records the ordered part ids
FeatureVector early_fusion(const std::vector<FeatureVector>& parts);

using Descriptor = std::variant<HogConfig, GistConfig>;

FeatureVector compute_descriptor(const Image& image, const Descriptor& d);

// descriptor id the fused video vector will carry, without computing it
std::string fused_id(const std::vector<Descriptor>& descriptors);
std::size_t fused_dim(const std::vector<Descriptor>& descriptors);

// per-frame descriptors averaged elementwise across frames, then fused
// across descriptors
FeatureVector video_features(const FrameSequence& frames,
                             const std::vector<Descriptor>& descriptors);

// CSV rows "id,v1,...,vD"; every row must have exactly expected_dim values
std::map<std::string, FeatureVector> load_external_features(
    const std::filesystem::path& path, std::size_t expected_dim);

// Binary feature cache, magic "PFEA": descriptor id, dimension, then
// (video id, values) records. Little-endian, bit-exact round trip.
struct FeatureCache {
  std::string descriptor_id;
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::vector<double>>> entries;
};

void save_feature_cache(const std::filesystem::path& path,
                        const FeatureCache& cache);
FeatureCache load_feature_cache(const std::filesystem::path& path);

}  // namespace popcast::features
