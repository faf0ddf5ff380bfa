#pragma once
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "popcast/tensor.hpp"

namespace popcast {

// Versioned binary checkpoint. Layout, all integers little-endian:
//   magic "PLRC" | u32 version | u32 meta_len | meta bytes
//   | u32 tensor_count | per tensor:
//     u32 name_len | name | u8 dtype (0=f32, 1=f64) | u8 rank
//     | u64 dims[rank] | raw values
// Round-trips are bit-exact. The meta block carries arbitrary text
// (the network writes its configuration as canonical JSON there).
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  std::variant<Tensor<float>, Tensor<double>> data;
};

struct Checkpoint {
  std::string meta;
  std::vector<NamedTensor> tensors;
};

void save_checkpoint(const std::filesystem::path& path,
                     const Checkpoint& checkpoint);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace popcast
