#pragma once
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "popcast/rng.hpp"
#include "popcast/tensor.hpp"

namespace test_support {

inline popcast::Tensor<double> random_tensor(std::vector<std::size_t> shape,
                                             popcast::Rng& rng,
                                             double lo = -1.0,
                                             double hi = 1.0) {
  popcast::Tensor<double> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i)
    t[i] = lo + (hi - lo) * rng.uniform();
  return t;
}

template <typename T>
double max_abs_diff(const popcast::Tensor<T>& a, const popcast::Tensor<T>& b) {
  if (!a.same_shape(b)) return 1e300;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  return m;
}

template <typename T>
bool all_finite(const popcast::Tensor<T>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!std::isfinite(double(t[i]))) return false;
  return true;
}

// unique scratch directory, removed on destruction
class TempDir {
 public:
  explicit TempDir(const std::string& hint) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("popcast_test_" + hint + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<unsigned char> read_file_bytes(
    const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace test_support
