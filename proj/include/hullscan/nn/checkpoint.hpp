#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace hullscan::nn {

inline constexpr int kCheckpointFormatVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TensorEntry {
  std::string name;
  std::string dtype;
  std::vector<std::int64_t> shape;
  std::uint64_t offset = 0;
  std::uint64_t nbytes = 0;
};

struct CheckpointHeader {
  int format_version = kCheckpointFormatVersion;
  std::string architecture;
  nlohmann::json config;
  std::vector<TensorEntry> tensors;
};

/// Single file: "HSCK", u64 little-endian header length, JSON header, then the
/// raw little-endian bytes of every parameter and buffer.
void save_checkpoint(const std::filesystem::path& path, torch::nn::Module& module, const std::string& architecture,
                     const nlohmann::json& config);

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path);

/// Copies tensors into `module`. Throws CheckpointError on an architecture id
/// mismatch, a missing or extra tensor, or any shape difference.
CheckpointHeader load_checkpoint(const std::filesystem::path& path, torch::nn::Module& module,
                                 const std::string& architecture);

}  // namespace hullscan::nn
