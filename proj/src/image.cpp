#include "popcast/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "popcast/error.hpp"

namespace popcast {

namespace {

// next whitespace-delimited token, skipping '#' comments
std::string ppm_token(std::istream& is) {
  std::string tok;
  int ch;
  while ((ch = is.get()) != EOF) {
    if (ch == '#') {
      while ((ch = is.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "ppm: cannot open '" + path.string() + "'");
  require(ppm_token(is) == "P6", "ppm: '" + path.string() + "' is not P6");
  const std::string ws = ppm_token(is), hs = ppm_token(is),
                    ms = ppm_token(is);
  require(!ws.empty() && !hs.empty() && !ms.empty(),
          "ppm: truncated header in '" + path.string() + "'");
  const std::size_t w = std::stoul(ws), h = std::stoul(hs);
  require(std::stoul(ms) == 255,
          "ppm: only maxval 255 supported in '" + path.string() + "'");
  std::vector<unsigned char> raw(w * h * 3);
  is.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  require(bool(is), "ppm: truncated pixel data in '" + path.string() + "'");
  Image img({3, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c)
        img(c, y, x) = raw[(y * w + x) * 3 + c] / 255.0;
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  require(img.rank() == 3 && img.dim(0) == 3, "ppm: image must be [3,H,W]");
  const std::size_t h = img.dim(1), w = img.dim(2);
  std::ofstream os(path, std::ios::binary);
  require(bool(os), "ppm: cannot open '" + path.string() + "' for writing");
  os << "P6\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> raw(w * h * 3);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = std::clamp(img(c, y, x), 0.0, 1.0);
        raw[(y * w + x) * 3 + c] =
            static_cast<unsigned char>(v * 255.0 + 0.5);
      }
  os.write(reinterpret_cast<const char*>(raw.data()),
           static_cast<std::streamsize>(raw.size()));
  require(bool(os), "ppm: write failed for '" + path.string() + "'");
}

Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w) {
  require(out_h > 0 && out_w > 0, "resize: degenerate target size");
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  if (out_h == h && out_w == w) return img;
  Image out({c, out_h, out_w});
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  for (std::size_t oy = 0; oy < out_h; ++oy) {
    const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(h - 1));
    const std::size_t y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, h - 1);
    const double wy = fy - y0;
    for (std::size_t ox = 0; ox < out_w; ++ox) {
      const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(w - 1));
      const std::size_t x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, w - 1);
      const double wx = fx - x0;
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double top =
            img(ch, y0, x0) * (1 - wx) + img(ch, y0, x1) * wx;
        const double bot =
            img(ch, y1, x0) * (1 - wx) + img(ch, y1, x1) * wx;
        out(ch, oy, ox) = top * (1 - wy) + bot * wy;
      }
    }
  }
  return out;
}

Image rgb_to_gray(const Image& img) {
  if (img.dim(0) == 1) return img;
  require(img.dim(0) == 3, "gray: image must have 1 or 3 channels");
  const std::size_t h = img.dim(1), w = img.dim(2);
  Image out({1, h, w});
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      out(0, y, x) = 0.299 * img(0, y, x) + 0.587 * img(1, y, x) +
                     0.114 * img(2, y, x);
  return out;
}

Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t h,
           std::size_t w) {
  require(y0 + h <= img.dim(1) && x0 + w <= img.dim(2),
          "crop: window outside image");
  const std::size_t c = img.dim(0);
  Image out({c, h, w});
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out(ch, y, x) = img(ch, y0 + y, x0 + x);
  return out;
}

Image mirror_horizontal(const Image& img) {
  const std::size_t c = img.dim(0), h = img.dim(1), w = img.dim(2);
  Image out(img.shape());
  for (std::size_t ch = 0; ch < c; ++ch)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x)
        out(ch, y, x) = img(ch, y, w - 1 - x);
  return out;
}

double mean_value(const Image& img) {
  double s = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) s += img[i];
  return s / static_cast<double>(img.size());
}

}  // namespace popcast
