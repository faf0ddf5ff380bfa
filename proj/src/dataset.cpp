#include "popcast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "popcast/error.hpp"
#include "popcast/rng.hpp"

namespace popcast::dataset {

using nlohmann::json;

// --- dates -------------------------------------------------------------------

long Date::to_days() const {
  // civil-to-days conversion, proleptic Gregorian
  int y = year;
  const unsigned m = month, d = day;
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return static_cast<long>(era) * 146097 + static_cast<long>(doe) - 719468;
}

Date Date::from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), static_cast<int>(m),
          static_cast<int>(d)};
}

Date Date::parse(const std::string& iso) {
  require(iso.size() == 10 && iso[4] == '-' && iso[7] == '-',
          "date: '" + iso + "' is not YYYY-MM-DD");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    require(iso[i] >= '0' && iso[i] <= '9',
            "date: '" + iso + "' is not YYYY-MM-DD");
  Date d;
  d.year = std::stoi(iso.substr(0, 4));
  d.month = std::stoi(iso.substr(5, 2));
  d.day = std::stoi(iso.substr(8, 2));
  require(d.month >= 1 && d.month <= 12 && d.day >= 1 && d.day <= 31,
          "date: '" + iso + "' is out of range");
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

// --- scoring and labeling ---------------------------------------------------

double normalized_score(long long viewcount, long long followers) {
  require(viewcount >= 0, "normalized_score: viewcount must be >= 0");
  require(followers >= 1, "normalized_score: followers must be >= 1");
  return std::log2((static_cast<double>(viewcount) + 1.0) /
                   static_cast<double>(followers));
}

double lower_median(std::vector<double> scores) {
  require(!scores.empty(), "median: empty input");
  std::sort(scores.begin(), scores.end());
  return scores[(scores.size() - 1) / 2];
}

std::vector<int> median_split(const std::vector<double>& scores) {
  require(scores.size() >= 2, "median_split: need at least 2 samples");
  const double m = lower_median(scores);
  std::vector<int> labels(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i)
    labels[i] = scores[i] > m ? 1 : 0;
  return labels;
}

// --- frame sampling -----------------------------------------------------------

std::vector<std::size_t> sample_frame_indices(std::size_t available,
                                              double fps, int t) {
  require(available >= 1, "sample_frames: video has no frames");
  require(t >= 1, "sample_frames: need at least one output frame");
  const double eff_fps =
      fps > 0 ? fps : static_cast<double>(available) / 6.0;
  std::vector<std::size_t> out(t);
  for (int k = 0; k < t; ++k) {
    const double seconds = k * (6.0 / t);
    const auto idx =
        static_cast<std::size_t>(std::floor(seconds * eff_fps + 0.5));
    out[k] = std::min(idx, available - 1);
  }
  return out;
}

std::vector<std::filesystem::path> list_frames(
    const std::filesystem::path& frames_dir) {
  std::vector<std::filesystem::path> out;
  if (!std::filesystem::is_directory(frames_dir)) return out;
  for (const auto& entry : std::filesystem::directory_iterator(frames_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("frame_") && name.ends_with(".ppm"))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrameSequence load_video_frames(const VideoRecord& record, int t) {
  const auto paths = list_frames(record.frames_dir);
  require(!paths.empty(),
          "load_video_frames: no frames in '" + record.frames_dir.string() +
              "'");
  const auto indices =
      sample_frame_indices(paths.size(), record.fps.value_or(0.0), t);
  FrameSequence frames;
  frames.reserve(indices.size());
  // consecutive duplicates are common for short videos; read each file once
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i > 0 && indices[i] == indices[i - 1])
      frames.push_back(frames.back());
    else
      frames.push_back(read_ppm(paths[indices[i]]));
  }
  return frames;
}

// --- ingestion ------------------------------------------------------------

IngestResult ingest_manifest(const std::filesystem::path& manifest_path,
                             Date now, int min_age_days) {
  std::ifstream is(manifest_path);
  require(bool(is),
          "ingest: cannot open manifest '" + manifest_path.string() + "'");
  const std::filesystem::path base = manifest_path.parent_path();

  IngestResult result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    std::string id = "line" + std::to_string(line_no);
    try {
      j = json::parse(line);
      if (j.contains("id") && j["id"].is_string())
        id = j["id"].get<std::string>();
    } catch (const json::exception&) {
      result.rejections.emplace_back(id, "missing-field");
      continue;
    }

    const char* required[] = {"id",        "frames_dir",   "viewcount",
                              "followers", "published_at", "crawled_at"};
    bool missing = false;
    for (const char* key : required)
      if (!j.contains(key)) missing = true;
    if (missing) {
      result.rejections.emplace_back(id, "missing-field");
      continue;
    }

    VideoRecord rec;
    try {
      rec.id = j.at("id").get<std::string>();
      rec.frames_dir =
          base / std::filesystem::path(j.at("frames_dir").get<std::string>());
      rec.viewcount = j.at("viewcount").get<long long>();
      rec.followers = j.at("followers").get<long long>();
      rec.published_at = Date::parse(j.at("published_at").get<std::string>());
      rec.crawled_at = Date::parse(j.at("crawled_at").get<std::string>());
      if (j.contains("fps")) rec.fps = j.at("fps").get<double>();
      if (j.contains("thumbnails"))
        rec.thumbnails = j.at("thumbnails").get<std::vector<std::string>>();
    } catch (const std::exception&) {
      result.rejections.emplace_back(id, "missing-field");
      continue;
    }

    if (rec.viewcount < 0 || rec.followers < 1 ||
        rec.crawled_at.to_days() < rec.published_at.to_days()) {
      result.rejections.emplace_back(rec.id, "invalid-field");
      continue;
    }
    if (now.to_days() - rec.published_at.to_days() < min_age_days) {
      result.rejections.emplace_back(rec.id, "too-recent");
      continue;
    }
    if (list_frames(rec.frames_dir).empty()) {
      result.rejections.emplace_back(rec.id, "missing-frames");
      continue;
    }
    result.accepted.push_back(std::move(rec));
  }
  return result;
}

void write_rejection_log(const std::filesystem::path& path,
                         const IngestResult& result) {
  std::ofstream os(path);
  require(bool(os), "cannot open rejection log '" + path.string() + "'");
  os << "id,reason\n";
  for (const auto& [id, reason] : result.rejections)
    os << id << "," << reason << "\n";
}

// --- fold splitting ---------------------------------------------------------

std::vector<int> FoldSplit::test_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == fold) out.push_back(static_cast<int>(i));
  return out;
}

std::vector<int> FoldSplit::train_indices(int fold) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] != fold) out.push_back(static_cast<int>(i));
  return out;
}

FoldSplit kfold_split(std::size_t count, int k, std::uint64_t seed) {
  require(k >= 2, "kfold_split: k must be >= 2");
  require(count >= static_cast<std::size_t>(k),
          "kfold_split: fewer samples than folds");
  std::vector<std::size_t> perm(count);
  for (std::size_t i = 0; i < count; ++i) perm[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < count; ++i) {
    const std::size_t j = i + rng.uniform_int(count - i);
    std::swap(perm[i], perm[j]);
  }
  FoldSplit split;
  split.k = k;
  split.assignment.assign(count, 0);
  for (std::size_t i = 0; i < count; ++i)
    split.assignment[perm[i]] = static_cast<int>(i % k);
  return split;
}

}  // namespace popcast::dataset
