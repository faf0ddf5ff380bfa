#pragma once
#include <cstdint>
#include <filesystem>
#include <string>

#include "popcast/dataset.hpp"

namespace popcast::dataset {

enum class SyntheticCue { brightness_trend, static_brightness, noise };

SyntheticCue parse_cue(const std::string& name);
std::string cue_name(SyntheticCue cue);

// Stand-in for a crawled corpus: renders each video as a centred bright disc
// whose area tracks a per-frame brightness level, so the level is visible to
// both edge- and frequency-based descriptors.
//   brightness_trend:  the level rises monotonically across frames for
//                      popular videos and falls for unpopular ones; the
//                      per-video time average is the same constant either
//                      way, so order-blind features carry no class signal.
//   static_brightness: the level is constant per video, high for popular.
//   noise:             the level is random and independent of the label.
// Viewcounts invert the normalized popularity score so the median split
// reproduces the intended labels; followers are log-uniform in [1e2, 1e6].
struct GenerateOptions {
  std::filesystem::path out_dir;
  std::size_t n_videos = 0;
  SyntheticCue cue = SyntheticCue::brightness_trend;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  int frames_per_video = 6;
  std::size_t frame_h = 40, frame_w = 40;
};

// writes <out>/videos/<id>/frame_*.ppm and <out>/manifest.jsonl;
// fully reproducible from the seed, byte for byte
void generate_synthetic(const GenerateOptions& options);

}  // namespace popcast::dataset
