#include "popcast/features.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>

#include "popcast/detail/binio.hpp"
#include "popcast/error.hpp"

namespace popcast::features {

using std::numbers::pi;

// --- HOG --------------------------------------------------------------------

std::size_t HogConfig::blocks_y() const {
  const std::size_t cells = resize_h / cell;
  require(cells >= static_cast<std::size_t>(block),
          "hog: fewer cells than block size");
  return (cells - block) / block_stride + 1;
}

std::size_t HogConfig::blocks_x() const {
  const std::size_t cells = resize_w / cell;
  require(cells >= static_cast<std::size_t>(block),
          "hog: fewer cells than block size");
  return (cells - block) / block_stride + 1;
}

std::size_t HogConfig::dim() const {
  return blocks_y() * blocks_x() * block * block * bins;
}

std::string HogConfig::id() const {
  std::ostringstream os;
  os << "hog|" << resize_h << "x" << resize_w << "|c" << cell << "|b" << block
     << "|s" << block_stride << "|n" << bins << (signed_grad ? "|sg" : "|ug")
     << "|e" << epsilon;
  return "hog:" + detail::hex64(detail::fnv1a(os.str()));
}

FeatureVector hog(const Image& image, const HogConfig& config) {
  require(image.size() > 0, "hog: empty image");
  require(config.resize_h >= static_cast<std::size_t>(config.cell) &&
              config.resize_w >= static_cast<std::size_t>(config.cell),
          "hog: degenerate resize target");
  require(config.cell >= 1 && config.block >= 1 && config.block_stride >= 1 &&
              config.bins >= 2,
          "hog: invalid configuration");

  const Image gray =
      rgb_to_gray(resize_bilinear(image, config.resize_h, config.resize_w));
  const std::size_t h = config.resize_h, w = config.resize_w;

  // centered [-1,0,1] gradients, borders clamped
  std::vector<double> mag(h * w), ang(h * w);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const double gx = gray(0, y, x + 1 < w ? x + 1 : w - 1) -
                        gray(0, y, x > 0 ? x - 1 : 0);
      const double gy = gray(0, y + 1 < h ? y + 1 : h - 1, x) -
                        gray(0, y > 0 ? y - 1 : 0, x);
      mag[y * w + x] = std::hypot(gx, gy);
      ang[y * w + x] = std::atan2(gy, gx);
    }

  const std::size_t cells_y = h / config.cell, cells_x = w / config.cell;
  const double period = config.signed_grad ? 2.0 * pi : pi;
  const double bin_width = period / config.bins;
  std::vector<double> hist(cells_y * cells_x * config.bins, 0.0);

  for (std::size_t y = 0; y < cells_y * config.cell; ++y)
    for (std::size_t x = 0; x < cells_x * config.cell; ++x) {
      const double m = mag[y * w + x];
      if (m == 0.0) continue;
      double a = ang[y * w + x];
      while (a < 0) a += period;
      while (a >= period) a -= period;
      // bin centers at integer multiples of bin_width, circular interpolation
      const double pos = a / bin_width;
      const int b0 = static_cast<int>(pos) % config.bins;
      const int b1 = (b0 + 1) % config.bins;
      const double frac = pos - static_cast<int>(pos);
      const std::size_t cell_idx =
          (y / config.cell) * cells_x + (x / config.cell);
      hist[cell_idx * config.bins + b0] += m * (1.0 - frac);
      hist[cell_idx * config.bins + b1] += m * frac;
    }

  const std::size_t by = config.blocks_y(), bx = config.blocks_x();
  FeatureVector out;
  out.descriptor_id = config.id();
  out.values.reserve(config.dim());
  std::vector<double> block_vals(config.block * config.block * config.bins);
  for (std::size_t y = 0; y < by; ++y)
    for (std::size_t x = 0; x < bx; ++x) {
      std::size_t k = 0;
      for (int cy = 0; cy < config.block; ++cy)
        for (int cx = 0; cx < config.block; ++cx) {
          const std::size_t cell_idx =
              (y * config.block_stride + cy) * cells_x +
              (x * config.block_stride + cx);
          for (int b = 0; b < config.bins; ++b)
            block_vals[k++] = hist[cell_idx * config.bins + b];
        }
      double norm2 = 0.0;
      for (double v : block_vals) norm2 += v * v;
      const double inv =
          1.0 / std::sqrt(norm2 + config.epsilon * config.epsilon);
      for (double v : block_vals) out.values.push_back(v * inv);
    }
  return out;
}

// --- GIST --------------------------------------------------------------------

std::size_t GistConfig::filter_count() const {
  std::size_t n = 0;
  for (int o : orientations_per_scale) n += o;
  return n;
}

std::size_t GistConfig::dim() const {
  return static_cast<std::size_t>(grid) * grid * filter_count() *
         (color ? 3 : 1);
}

std::string GistConfig::id() const {
  std::ostringstream os;
  os << "gist|" << resize_h << "x" << resize_w << "|g" << grid << "|o";
  for (int o : orientations_per_scale) os << o << ",";
  os << (color ? "c" : "g");
  return "gist:" + detail::hex64(detail::fnv1a(os.str()));
}

namespace {

using cplx = std::complex<double>;

bool is_pow2(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

// in-place radix-2; falls back to a direct DFT for non-power-of-two sizes
void fft_1d(cplx* a, std::size_t n, std::size_t stride, bool inverse,
            std::vector<cplx>& scratch) {
  if (!is_pow2(n)) {
    scratch.assign(n, cplx(0, 0));
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      cplx acc(0, 0);
      for (std::size_t j = 0; j < n; ++j)
        acc += a[j * stride] *
               std::polar(1.0, sign * 2.0 * pi * k * j / double(n));
      scratch[k] = acc;
    }
    for (std::size_t k = 0; k < n; ++k) a[k * stride] = scratch[k];
    return;
  }
  // bit reversal
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i * stride], a[j * stride]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = (inverse ? 2.0 : -2.0) * pi / double(len);
    const cplx wl = std::polar(1.0, angle);
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1, 0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cplx u = a[(i + j) * stride];
        cplx v = a[(i + j + len / 2) * stride] * w;
        a[(i + j) * stride] = u + v;
        a[(i + j + len / 2) * stride] = u - v;
        w *= wl;
      }
    }
  }
}

void fft_2d(std::vector<cplx>& grid, std::size_t h, std::size_t w,
            bool inverse) {
  std::vector<cplx> scratch;
  for (std::size_t y = 0; y < h; ++y)
    fft_1d(grid.data() + y * w, w, 1, inverse, scratch);
  for (std::size_t x = 0; x < w; ++x)
    fft_1d(grid.data() + x, h, w, inverse, scratch);
  if (inverse) {
    const double scale = 1.0 / (double(h) * double(w));
    for (auto& v : grid) v *= scale;
  }
}

// Log-polar Gaussian transfer functions, single analytic lobe per filter,
// DC forced to zero.
struct GistBank {
  std::size_t h, w;
  std::vector<std::vector<double>> filters;
};

std::shared_ptr<const GistBank> gist_bank(const GistConfig& config) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const GistBank>> cache;

  std::ostringstream key_os;
  key_os << config.id() << "|" << config.resize_h << "x" << config.resize_w;
  const std::string key = key_os.str();

  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  auto bank = std::make_shared<GistBank>();
  const std::size_t h = config.resize_h, w = config.resize_w;
  bank->h = h;
  bank->w = w;
  const double sigma_r = 0.55;  // radial width in log-frequency units
  for (std::size_t s = 0; s < config.orientations_per_scale.size(); ++s) {
    const double rho = 0.32 / std::pow(2.0, double(s));
    const int orients = config.orientations_per_scale[s];
    const double sigma_t = 0.6 * pi / orients;
    for (int o = 0; o < orients; ++o) {
      const double theta = pi * o / orients;
      std::vector<double> f(h * w, 0.0);
      for (std::size_t u = 0; u < h; ++u)
        for (std::size_t v = 0; v < w; ++v) {
          const double fy =
              (u <= h / 2 ? double(u) : double(u) - double(h)) / double(h);
          const double fx =
              (v <= w / 2 ? double(v) : double(v) - double(w)) / double(w);
          const double r = std::hypot(fx, fy);
          if (r == 0.0) continue;  // DC response is zero
          double dt = std::atan2(fy, fx) - theta;
          while (dt > pi) dt -= 2.0 * pi;
          while (dt < -pi) dt += 2.0 * pi;
          const double lr = std::log(r / rho);
          f[u * w + v] = std::exp(-lr * lr / (2.0 * sigma_r * sigma_r) -
                                  dt * dt / (2.0 * sigma_t * sigma_t));
        }
      bank->filters.push_back(std::move(f));
    }
  }
  cache[key] = bank;
  return bank;
}

}  // namespace

FeatureVector gist(const Image& image, const GistConfig& config) {
  require(image.size() > 0, "gist: empty image");
  require(config.grid >= 1, "gist: invalid grid");
  require(static_cast<std::size_t>(config.grid) <= config.resize_h &&
              static_cast<std::size_t>(config.grid) <= config.resize_w,
          "gist: grid larger than image");
  require(!config.orientations_per_scale.empty(),
          "gist: no scales configured");

  const Image resized =
      resize_bilinear(image, config.resize_h, config.resize_w);
  const std::size_t h = config.resize_h, w = config.resize_w;
  const auto bank = gist_bank(config);

  std::vector<Image> channels;
  if (config.color) {
    require(resized.dim(0) == 3, "gist: color config needs an RGB image");
    for (std::size_t c = 0; c < 3; ++c) {
      Image plane({1, h, w});
      for (std::size_t i = 0; i < h * w; ++i) plane[i] = resized[c * h * w + i];
      channels.push_back(std::move(plane));
    }
  } else {
    channels.push_back(rgb_to_gray(resized));
  }

  FeatureVector out;
  out.descriptor_id = config.id();
  out.values.reserve(config.dim());

  const std::size_t g = config.grid;
  std::vector<cplx> spectrum(h * w), response(h * w);
  for (const Image& plane : channels) {
    for (std::size_t i = 0; i < h * w; ++i) spectrum[i] = cplx(plane[i], 0.0);
    fft_2d(spectrum, h, w, false);
    for (const auto& filter : bank->filters) {
      for (std::size_t i = 0; i < h * w; ++i)
        response[i] = spectrum[i] * filter[i];
      fft_2d(response, h, w, true);
      for (std::size_t gy = 0; gy < g; ++gy)
        for (std::size_t gx = 0; gx < g; ++gx) {
          const std::size_t y0 = gy * h / g, y1 = (gy + 1) * h / g;
          const std::size_t x0 = gx * w / g, x1 = (gx + 1) * w / g;
          double acc = 0.0;
          for (std::size_t y = y0; y < y1; ++y)
            for (std::size_t x = x0; x < x1; ++x)
              acc += std::abs(response[y * w + x]);
          out.values.push_back(acc / (double(y1 - y0) * double(x1 - x0)));
        }
    }
  }
  return out;
}

// --- fusion and aggregation ---------------------------------------------------

FeatureVector early_fusion(const std::vector<FeatureVector>& parts) {
  require(!parts.empty(), "early_fusion: empty part list");
  if (parts.size() == 1) return parts[0];
  FeatureVector out;
  std::string ids;
  for (const auto& p : parts) {
    out.values.insert(out.values.end(), p.values.begin(), p.values.end());
    if (!ids.empty()) ids += "+";
    ids += p.descriptor_id;
  }
  out.descriptor_id = "fuse(" + ids + ")";
  return out;
}

FeatureVector compute_descriptor(const Image& image, const Descriptor& d) {
  if (std::holds_alternative<HogConfig>(d))
    return hog(image, std::get<HogConfig>(d));
  return gist(image, std::get<GistConfig>(d));
}

std::string fused_id(const std::vector<Descriptor>& descriptors) {
  require(!descriptors.empty(), "fused_id: empty descriptor list");
  std::string ids;
  for (const auto& d : descriptors) {
    if (!ids.empty()) ids += "+";
    ids += std::visit([](const auto& c) { return c.id(); }, d);
  }
  return descriptors.size() == 1 ? ids : "fuse(" + ids + ")";
}

std::size_t fused_dim(const std::vector<Descriptor>& descriptors) {
  std::size_t n = 0;
  for (const auto& d : descriptors)
    n += std::visit([](const auto& c) { return c.dim(); }, d);
  return n;
}

FeatureVector video_features(const FrameSequence& frames,
                             const std::vector<Descriptor>& descriptors) {
  require(!frames.empty(), "video_features: empty frame sequence");
  require(!descriptors.empty(), "video_features: no descriptors");
  std::vector<FeatureVector> parts;
  parts.reserve(descriptors.size());
  for (const Descriptor& d : descriptors) {
    FeatureVector mean = compute_descriptor(frames[0], d);
    for (std::size_t t = 1; t < frames.size(); ++t) {
      const FeatureVector f = compute_descriptor(frames[t], d);
      for (std::size_t i = 0; i < mean.values.size(); ++i)
        mean.values[i] += f.values[i];
    }
    for (double& v : mean.values) v /= double(frames.size());
    parts.push_back(std::move(mean));
  }
  return early_fusion(parts);
}

// --- external features -----------------------------------------------------

std::map<std::string, FeatureVector> load_external_features(
    const std::filesystem::path& path, std::size_t expected_dim) {
  std::ifstream is(path);
  require(bool(is), "external features: cannot open '" + path.string() + "'");
  std::map<std::string, FeatureVector> out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    require(!fields[0].empty(), "external features: row " +
                                    std::to_string(row) + ": empty video id");
    require(fields.size() - 1 == expected_dim,
            "external features: row " + std::to_string(row) + ": expected " +
                std::to_string(expected_dim) + " values, got " +
                std::to_string(fields.size() - 1));
    FeatureVector v;
    v.descriptor_id = "external:" + std::to_string(expected_dim);
    v.values.reserve(expected_dim);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        std::size_t used = 0;
        const double value = std::stod(fields[i], &used);
        require(used == fields[i].size(), "trailing characters");
        v.values.push_back(value);
      } catch (const std::exception&) {
        fail("external features: row " + std::to_string(row) +
             ": malformed value '" + fields[i] + "'");
      }
    }
    require(!out.count(fields[0]), "external features: row " +
                                       std::to_string(row) +
                                       ": duplicate video id '" + fields[0] +
                                       "'");
    out.emplace(fields[0], std::move(v));
  }
  return out;
}

// --- feature cache -----------------------------------------------------------

void save_feature_cache(const std::filesystem::path& path,
                        const FeatureCache& cache) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os),
          "feature cache: cannot open '" + path.string() + "' for writing");
  os.write("PFEA", 4);
  detail::put_u32(os, 1);  // version
  detail::put_string(os, cache.descriptor_id);
  detail::put_u32(os, static_cast<std::uint32_t>(cache.dim));
  detail::put_u64(os, cache.entries.size());
  for (const auto& [id, values] : cache.entries) {
    require(values.size() == cache.dim,
            "feature cache: entry '" + id + "' has wrong dimension");
    detail::put_string(os, id);
    for (double v : values) detail::put_f64(os, v);
  }
  require(bool(os), "feature cache: write failed for '" + path.string() + "'");
}

FeatureCache load_feature_cache(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "feature cache: cannot open '" + path.string() + "'");
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::string(magic, 4) == "PFEA",
          "feature cache: bad magic in '" + path.string() + "'");
  require(detail::get_u32(is) == 1, "feature cache: unsupported version");
  FeatureCache cache;
  cache.descriptor_id = detail::get_string(is);
  cache.dim = detail::get_u32(is);
  const std::uint64_t count = detail::get_u64(is);
  cache.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string id = detail::get_string(is);
    std::vector<double> values(cache.dim);
    for (auto& v : values) v = detail::get_f64(is);
    cache.entries.emplace_back(std::move(id), std::move(values));
  }
  return cache;
}

}  // namespace popcast::features
