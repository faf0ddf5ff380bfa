#include "popcast/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "popcast/detail/binio.hpp"
#include "popcast/error.hpp"

namespace popcast {

using detail::get_u32;
using detail::get_u64;
using detail::put_u32;
using detail::put_u64;

namespace {

template <typename T, typename Bits>
void put_values(std::ostream& os, const Tensor<T>& t) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    Bits bits;
    std::memcpy(&bits, &t[i], sizeof(T));
    if constexpr (sizeof(T) == 4)
      put_u32(os, bits);
    else
      put_u64(os, bits);
  }
}

template <typename T, typename Bits>
Tensor<T> get_values(std::istream& is, std::vector<std::size_t> shape) {
  Tensor<T> t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) {
    Bits bits;
    if constexpr (sizeof(T) == 4)
      bits = get_u32(is);
    else
      bits = get_u64(is);
    std::memcpy(&t[i], &bits, sizeof(T));
  }
  return t;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint) {
  std::ofstream os(path, std::ios::binary);
  require(bool(os),
          "checkpoint: cannot open '" + path.string() + "' for writing");
  os.write("PLRC", 4);
  put_u32(os, kCheckpointVersion);
  detail::put_string(os, checkpoint.meta);
  put_u32(os, static_cast<std::uint32_t>(checkpoint.tensors.size()));
  for (const auto& nt : checkpoint.tensors) {
    detail::put_string(os, nt.name);
    const bool is_double = std::holds_alternative<Tensor<double>>(nt.data);
    os.put(is_double ? char(1) : char(0));
    std::visit(
        [&](const auto& t) {
          os.put(static_cast<char>(t.rank()));
          for (std::size_t d = 0; d < t.rank(); ++d) put_u64(os, t.dim(d));
        },
        nt.data);
    if (is_double)
      put_values<double, std::uint64_t>(os, std::get<Tensor<double>>(nt.data));
    else
      put_values<float, std::uint32_t>(os, std::get<Tensor<float>>(nt.data));
  }
  require(bool(os), "checkpoint: write failed for '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(bool(is), "checkpoint: cannot open '" + path.string() + "'");
  char magic[4];
  is.read(magic, 4);
  require(bool(is) && std::memcmp(magic, "PLRC", 4) == 0,
          "checkpoint: bad magic in '" + path.string() + "'");
  const std::uint32_t version = get_u32(is);
  require(version == kCheckpointVersion,
          "checkpoint: unsupported version " + std::to_string(version));
  Checkpoint checkpoint;
  checkpoint.meta = detail::get_string(is);
  const std::uint32_t count = get_u32(is);
  checkpoint.tensors.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedTensor nt;
    nt.name = detail::get_string(is);
    const int dtype = is.get();
    const int rank = is.get();
    require(bool(is) && (dtype == 0 || dtype == 1) && rank >= 0,
            "checkpoint: corrupt tensor header");
    std::vector<std::size_t> shape(rank);
    for (int d = 0; d < rank; ++d)
      shape[d] = static_cast<std::size_t>(get_u64(is));
    if (dtype == 1)
      nt.data = get_values<double, std::uint64_t>(is, std::move(shape));
    else
      nt.data = get_values<float, std::uint32_t>(is, std::move(shape));
    checkpoint.tensors.push_back(std::move(nt));
  }
  return checkpoint;
}

}  // namespace popcast
