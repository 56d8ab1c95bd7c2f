#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "absa/param_store.hpp"
#include "absa/tensor.hpp"

namespace absa {

// Binary archive of named float32 tensors.
//
//   magic        "ABSA-CKPT\0"            10 bytes
//   version      uint8                    currently 1
//   count        uint32 LE
//   count x {
//     name_len   uint32 LE
//     name       name_len bytes (UTF-8, no terminator)
//     rank       uint32 LE
//     extents    rank x uint32 LE
//     values     product(extents) x float32 LE, row-major
//   }
//
// Values are rounded to float32 on write.
inline constexpr char kCheckpointMagic[10] = {'A', 'B', 'S', 'A', '-', 'C', 'K', 'P', 'T', '\0'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor value;
};

std::string encode_archive(const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> decode_archive(const std::string& bytes);

void write_archive(const std::filesystem::path& path, const std::vector<NamedTensor>& entries);
std::vector<NamedTensor> read_archive(const std::filesystem::path& path);

// Parameter values only; gradients and optimizer state are not persisted.
void save_params(const std::filesystem::path& path, const ParamStore& store);
// Every store entry must be present in the archive with a matching shape.
// Extra archive entries are ignored.
void load_params(const std::filesystem::path& path, ParamStore& store);
void load_params(const std::vector<NamedTensor>& entries, ParamStore& store);

}  // namespace absa
