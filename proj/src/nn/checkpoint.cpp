#include "hullscan/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>

#include "hullscan/nn/tensor_util.hpp"

namespace hullscan::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'H', 'S', 'C', 'K'};

std::map<std::string, torch::Tensor> state_of(torch::nn::Module& module) {
  std::map<std::string, torch::Tensor> state;
  for (auto& p : module.named_parameters(true)) state[p.key()] = p.value();
  for (auto& b : module.named_buffers(true)) state[b.key()] = b.value();
  return state;
}

std::string dtype_name(torch::ScalarType t) {
  switch (t) {
    case torch::kFloat32: return "f32";
    case torch::kFloat64: return "f64";
    case torch::kInt64: return "i64";
    default: throw CheckpointError("checkpoint: unsupported dtype " + std::string(c10::toString(t)));
  }
}

torch::ScalarType dtype_from(const std::string& s) {
  if (s == "f32") return torch::kFloat32;
  if (s == "f64") return torch::kFloat64;
  if (s == "i64") return torch::kInt64;
  throw CheckpointError("checkpoint: unknown dtype " + s);
}

struct Loaded {
  CheckpointHeader header;
  std::uint64_t payload_start = 0;
};

Loaded read_header(std::ifstream& in, const std::filesystem::path& path) {
  char magic[4];
  std::uint64_t len = 0;
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError("checkpoint " + path.string() + ": bad magic");
  }
  if (!in.read(reinterpret_cast<char*>(&len), sizeof len)) throw CheckpointError("checkpoint: truncated header");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) throw CheckpointError("checkpoint: truncated header");
  Loaded out;
  out.payload_start = 4 + sizeof len + len;
  try {
    const auto j = nlohmann::json::parse(text);
    out.header.format_version = j.at("format_version").get<int>();
    out.header.architecture = j.at("architecture").get<std::string>();
    out.header.config = j.at("config");
    for (const auto& t : j.at("tensors")) {
      out.header.tensors.push_back({t.at("name").get<std::string>(), t.at("dtype").get<std::string>(),
                                    t.at("shape").get<std::vector<std::int64_t>>(), t.at("offset").get<std::uint64_t>(),
                                    t.at("nbytes").get<std::uint64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("checkpoint " + path.string() + ": malformed header: " + e.what());
  }
  if (out.header.format_version != kCheckpointFormatVersion) {
    throw CheckpointError("checkpoint: unsupported format version " + std::to_string(out.header.format_version));
  }
  return out;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, torch::nn::Module& module, const std::string& architecture,
                     const nlohmann::json& config) {
  const auto state = state_of(module);
  nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                           {"architecture", architecture},
                           {"config", config},
                           {"tensors", nlohmann::json::array()}};
  std::vector<torch::Tensor> blobs;
  std::uint64_t offset = 0;
  for (const auto& [name, t] : state) {
    auto c = t.detach().contiguous();
    const std::uint64_t nbytes = static_cast<std::uint64_t>(c.numel()) * c.element_size();
    header["tensors"].push_back(
        {{"name", name}, {"dtype", dtype_name(c.scalar_type())}, {"shape", c.sizes().vec()}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
    blobs.push_back(c);
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path.string());
  const std::string text = header.dump();
  const std::uint64_t len = text.size();
  out.write(kMagic, 4);
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(len));
  for (const auto& b : blobs) {
    out.write(static_cast<const char*>(b.data_ptr()), static_cast<std::streamsize>(b.numel() * b.element_size()));
  }
  if (!out) throw CheckpointError("checkpoint: write failed for " + path.string());
}

CheckpointHeader read_checkpoint_header(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_header(in, path).header;
}

CheckpointHeader load_checkpoint(const std::filesystem::path& path, torch::nn::Module& module,
                                 const std::string& architecture) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  const Loaded loaded = read_header(in, path);
  const auto& header = loaded.header;
  if (header.architecture != architecture) {
    throw CheckpointError("checkpoint " + path.string() + ": architecture '" + header.architecture +
                          "', expected '" + architecture + "'");
  }
  auto state = state_of(module);
  if (state.size() != header.tensors.size()) {
    throw CheckpointError("checkpoint " + path.string() + ": holds " + std::to_string(header.tensors.size()) +
                          " tensors, model has " + std::to_string(state.size()));
  }
  torch::NoGradGuard guard;
  for (const auto& e : header.tensors) {
    auto it = state.find(e.name);
    if (it == state.end()) throw CheckpointError("checkpoint: unexpected tensor " + e.name);
    auto& target = it->second;
    if (target.sizes().vec() != e.shape || target.scalar_type() != dtype_from(e.dtype)) {
      throw CheckpointError("checkpoint: tensor " + e.name + " has shape " + shape_string(e.shape) +
                            ", model expects " + shape_string(target.sizes()));
    }
    auto buf = torch::empty(e.shape, torch::TensorOptions().dtype(dtype_from(e.dtype)));
    if (static_cast<std::uint64_t>(buf.numel()) * buf.element_size() != e.nbytes) {
      throw CheckpointError("checkpoint: size mismatch for " + e.name);
    }
    in.seekg(static_cast<std::streamoff>(loaded.payload_start + e.offset));
    if (!in.read(static_cast<char*>(buf.data_ptr()), static_cast<std::streamsize>(e.nbytes))) {
      throw CheckpointError("checkpoint: truncated payload at " + e.name);
    }
    target.copy_(buf);
  }
  return header;
}

}  // namespace hullscan::nn
