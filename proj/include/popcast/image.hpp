#pragma once
#include <filesystem>
#include <vector>

#include "popcast/tensor.hpp"

namespace popcast {

// Images are [C,H,W] tensors with values in [0,1]; a video is an ordered
// sequence of RGB frames.
using Image = Tensor<double>;
using FrameSequence = std::vector<Image>;

// binary PPM (P6, maxval 255)
Image read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Image& img);

// bilinear with half-pixel centers, clamped at borders
Image resize_bilinear(const Image& img, std::size_t out_h, std::size_t out_w);

// luma weights 0.299/0.587/0.114; single-channel input passes through
Image rgb_to_gray(const Image& img);

Image crop(const Image& img, std::size_t y0, std::size_t x0, std::size_t h,
           std::size_t w);

Image mirror_horizontal(const Image& img);

double mean_value(const Image& img);

}  // namespace popcast
