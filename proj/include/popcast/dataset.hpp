#pragma once
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "popcast/image.hpp"

namespace popcast::dataset {

// calendar date, compared in UTC
struct Date {
  int year = 1970, month = 1, day = 1;

  long to_days() const;  // days since 1970-01-01
  static Date from_days(long days);
  static Date parse(const std::string& iso);  // strict YYYY-MM-DD
  std::string to_string() const;

  friend bool operator==(const Date&, const Date&) = default;
};

struct VideoRecord {
  std::string id;
  std::filesystem::path frames_dir;
  long long viewcount = 0;
  long long followers = 1;
  Date published_at, crawled_at;
  std::optional<double> fps;
  std::vector<std::string> thumbnails;
};

struct LabeledSample {
  VideoRecord record;
  double score = 0.0;
  int label = 0;
};

// log2((viewcount+1)/followers)
double normalized_score(long long viewcount, long long followers);

// lower median for even counts; label 1 iff score > median, ties at the
// median go to 0
double lower_median(std::vector<double> scores);
std::vector<int> median_split(const std::vector<double>& scores);

// Uniform sampling over the first six seconds at t/6 fps with nearest-frame
// selection; indices clamp to the last available frame, so short videos
// repeat it. fps <= 0 means the available frames are assumed to span the
// six-second window uniformly.
std::vector<std::size_t> sample_frame_indices(std::size_t available,
                                              double fps, int t);

// sorted frame_*.ppm paths inside a video directory
std::vector<std::filesystem::path> list_frames(
    const std::filesystem::path& frames_dir);

FrameSequence load_video_frames(const VideoRecord& record, int t);

// --- manifest ingestion --------------------------------------------------

// One JSON object per line: id, frames_dir, viewcount, followers,
// published_at, crawled_at (ISO dates); optional fps and thumbnails.
// frames_dir is resolved relative to the manifest's directory.
struct IngestResult {
  std::vector<VideoRecord> accepted;
  std::vector<std::pair<std::string, std::string>> rejections;  // id, reason
};

IngestResult ingest_manifest(const std::filesystem::path& manifest_path,
                             Date now, int min_age_days = 14);

void write_rejection_log(const std::filesystem::path& path,
                         const IngestResult& result);

// --- fold splitting --------------------------------------------------------

struct FoldSplit {
  int k = 0;
  std::vector<int> assignment;  // fold index per input position

  std::vector<int> test_indices(int fold) const;
  std::vector<int> train_indices(int fold) const;
};

// seeded uniform shuffle then round-robin assignment
FoldSplit kfold_split(std::size_t count, int k, std::uint64_t seed);

}  // namespace popcast::dataset
