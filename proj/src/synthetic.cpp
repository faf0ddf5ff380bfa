#include "popcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "popcast/error.hpp"
#include "popcast/rng.hpp"

namespace popcast::dataset {

using nlohmann::json;

SyntheticCue parse_cue(const std::string& name) {
  if (name == "brightness_trend") return SyntheticCue::brightness_trend;
  if (name == "static_brightness") return SyntheticCue::static_brightness;
  if (name == "noise") return SyntheticCue::noise;
  fail("unknown cue '" + name +
       "' (known: brightness_trend, static_brightness, noise)");
}

std::string cue_name(SyntheticCue cue) {
  switch (cue) {
    case SyntheticCue::brightness_trend:
      return "brightness_trend";
    case SyntheticCue::static_brightness:
      return "static_brightness";
    default:
      return "noise";
  }
}

namespace {

constexpr double kBackground = 0.1, kForeground = 0.9;
constexpr double kTrendBase = 0.22;   // shared time-averaged level
constexpr double kTrendStep = 0.028;  // per-frame level change

// bright disc on a dark background; the disc area encodes the level
Image render_level_frame(std::size_t h, std::size_t w, double level,
                         double pixel_noise, Rng& rng) {
  const double area_frac =
      std::clamp((level - kBackground) / (kForeground - kBackground), 0.0, 1.0);
  const double radius =
      std::sqrt(area_frac * double(h) * double(w) / 3.14159265358979323846);
  const double cy = (double(h) - 1.0) / 2.0, cx = (double(w) - 1.0) / 2.0;
  Image img({3, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double dist = std::hypot(double(y) - cy, double(x) - cx);
      const double coverage = std::clamp(radius - dist + 0.5, 0.0, 1.0);
      double v = kBackground + (kForeground - kBackground) * coverage;
      if (pixel_noise > 0) v += pixel_noise * rng.normal();
      v = std::clamp(v, 0.0, 1.0);
      img(0, y, x) = v;
      img(1, y, x) = v;
      img(2, y, x) = v;
    }
  return img;
}

}  // namespace

void generate_synthetic(const GenerateOptions& opt) {
  require(opt.n_videos >= 4, "generate_synthetic: need at least 4 videos");
  require(opt.frames_per_video >= 1 && opt.frame_h >= 8 && opt.frame_w >= 8,
          "generate_synthetic: bad frame geometry");
  require(opt.noise_level >= 0, "generate_synthetic: negative noise level");

  const std::filesystem::path videos_dir = opt.out_dir / "videos";
  std::filesystem::create_directories(videos_dir);

  const std::size_t n = opt.n_videos;
  const std::size_t n_popular = n / 2;
  const int t = opt.frames_per_video;
  const Date base_date = Date::parse("2016-06-01");

  std::ofstream manifest(opt.out_dir / "manifest.jsonl");
  require(bool(manifest), "generate_synthetic: cannot write manifest");

  for (std::size_t i = 0; i < n; ++i) {
    const bool popular = i < n_popular;
    Rng rng = Rng(opt.seed).fork(100, i);

    const long long followers =
        std::llround(std::pow(10.0, 2.0 + 4.0 * rng.uniform()));
    const double target_score = popular ? 0.5 + 4.5 * rng.uniform()
                                        : -5.0 + 4.5 * rng.uniform();
    const long long viewcount = std::max<long long>(
        0, std::llround(double(followers) * std::exp2(target_score)) - 1);

    // per-frame brightness levels
    std::vector<double> level(t);
    switch (opt.cue) {
      case SyntheticCue::brightness_trend: {
        const double dir = popular ? 1.0 : -1.0;
        const double step =
            kTrendStep *
            (1.0 + 0.5 * opt.noise_level * (2.0 * rng.uniform() - 1.0));
        for (int f = 0; f < t; ++f)
          level[f] = kTrendBase + dir * step * (f - (t - 1) / 2.0);
        break;
      }
      case SyntheticCue::static_brightness: {
        const double lvl = popular ? 0.26 + 0.04 * rng.uniform()
                                   : 0.15 + 0.04 * rng.uniform();
        for (int f = 0; f < t; ++f) level[f] = lvl;
        break;
      }
      case SyntheticCue::noise: {
        for (int f = 0; f < t; ++f) level[f] = 0.15 + 0.15 * rng.uniform();
        break;
      }
    }
    const double jitter = opt.noise_level * 2.0 * kTrendStep;
    for (int f = 0; f < t; ++f) {
      if (jitter > 0) level[f] += jitter * rng.normal();
      level[f] = std::clamp(level[f], 0.12, 0.34);
    }

    char id[32];
    std::snprintf(id, sizeof id, "v%05zu", i);
    const std::filesystem::path dir = videos_dir / id;
    std::filesystem::create_directories(dir);
    for (int f = 0; f < t; ++f) {
      char name[24];
      std::snprintf(name, sizeof name, "frame_%05d.ppm", f);
      write_ppm(dir / name,
                render_level_frame(opt.frame_h, opt.frame_w, level[f],
                                   opt.noise_level, rng));
    }

    const Date published = Date::from_days(base_date.to_days() + long(i % 90));
    const Date crawled = Date::from_days(published.to_days() + 21);
    json line;
    line["id"] = id;
    line["frames_dir"] = std::string("videos/") + id;
    line["viewcount"] = viewcount;
    line["followers"] = followers;
    line["published_at"] = published.to_string();
    line["crawled_at"] = crawled.to_string();
    manifest << line.dump() << "\n";
  }
  require(bool(manifest), "generate_synthetic: manifest write failed");
}

}  // namespace popcast::dataset
