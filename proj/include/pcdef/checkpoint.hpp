#pragma once

#include <cstring>
#include <fstream>

#include "pcdef/dataset.hpp"

namespace pcdef {

// Checkpoint format "PFCK", version 1, little-endian:
//   magic[4] version:u16 head:u8 layer_count:u32
//   per layer: in:u32 out:u32 activation:u8
//   k_total:u64 params: k_total x f32
//   mask bitset: ceil(k_total/8) bytes (bit i = coordinate i corruptible)
//   checksum:u64 (FNV-1a over params + mask bytes)
inline constexpr char checkpoint_magic[4] = {'P', 'F', 'C', 'K'};
inline constexpr std::uint16_t checkpoint_version = 1;

namespace detail {

inline std::uint64_t fnv1a64(const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename T>
void put(std::vector<unsigned char>& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(const std::vector<unsigned char>& in, std::size_t& off, const std::string& path) {
  if (off + sizeof(T) > in.size())
    throw data_error(path + ": truncated checkpoint at byte offset " + std::to_string(off));
  T v;
  std::memcpy(&v, in.data() + off, sizeof(T));
  off += sizeof(T);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const Model& model, const ParamPartition& part,
                            const std::string& path) {
  if (part.mask.size() != model.param_count())
    throw invalid_input("save_checkpoint: partition length mismatch");
  std::vector<unsigned char> out;
  out.insert(out.end(), checkpoint_magic, checkpoint_magic + 4);
  detail::put<std::uint16_t>(out, checkpoint_version);
  detail::put<std::uint8_t>(out, model.head() == Head::SoftmaxCrossEntropy ? 0 : 1);
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(model.layers().size()));
  for (const LayerSpec& L : model.layers()) {
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(L.in));
    detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(L.out));
    detail::put<std::uint8_t>(out, static_cast<std::uint8_t>(L.act));
  }
  detail::put<std::uint64_t>(out, model.param_count());

  std::vector<unsigned char> payload;
  for (double p : model.params()) detail::put<float>(payload, static_cast<float>(p));
  std::vector<unsigned char> mask_bytes((model.param_count() + 7) / 8, 0);
  for (std::size_t i = 0; i < part.mask.size(); ++i)
    if (part.mask[i]) mask_bytes[i / 8] |= static_cast<unsigned char>(1u << (i % 8));
  payload.insert(payload.end(), mask_bytes.begin(), mask_bytes.end());

  std::uint64_t checksum = detail::fnv1a64(payload);
  out.insert(out.end(), payload.begin(), payload.end());
  detail::put<std::uint64_t>(out, checksum);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw data_error(path + ": cannot open for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

inline std::pair<Model, ParamPartition> load_checkpoint(const std::string& path) {
  auto bytes = detail::read_file_bytes(path);
  std::size_t off = 0;
  if (bytes.size() < 4 || std::memcmp(bytes.data(), checkpoint_magic, 4) != 0)
    throw data_error(path + ": bad checkpoint magic at byte offset 0 (expected PFCK)");
  off = 4;
  std::uint16_t version = detail::get<std::uint16_t>(bytes, off, path);
  if (version != checkpoint_version)
    throw data_error(path + ": unsupported checkpoint version " + std::to_string(version) +
                     " (this build reads version " + std::to_string(checkpoint_version) + ")");
  std::uint8_t head_byte = detail::get<std::uint8_t>(bytes, off, path);
  Head head = head_byte == 0 ? Head::SoftmaxCrossEntropy : Head::MeanSquaredError;
  std::uint32_t n_layers = detail::get<std::uint32_t>(bytes, off, path);
  if (n_layers == 0) throw data_error(path + ": zero layers");

  std::vector<std::size_t> dims;
  Activation hidden = Activation::Identity;
  for (std::uint32_t l = 0; l < n_layers; ++l) {
    std::uint32_t in = detail::get<std::uint32_t>(bytes, off, path);
    std::uint32_t out = detail::get<std::uint32_t>(bytes, off, path);
    std::uint8_t act = detail::get<std::uint8_t>(bytes, off, path);
    if (act > 2) throw data_error(path + ": unknown activation code");
    if (l == 0) dims.push_back(in);
    else if (dims.back() != in)
      throw data_error(path + ": inconsistent layer dimensions");
    dims.push_back(out);
    if (l + 1 < n_layers) hidden = static_cast<Activation>(act);
  }
  std::uint64_t k_total = detail::get<std::uint64_t>(bytes, off, path);

  Model model(dims, hidden, head);
  if (model.param_count() != k_total)
    throw data_error(path + ": parameter count " + std::to_string(k_total) +
                     " does not match layer table");

  std::size_t payload_begin = off;
  Vec params(k_total);
  for (std::uint64_t i = 0; i < k_total; ++i)
    params[i] = static_cast<double>(detail::get<float>(bytes, off, path));
  std::vector<unsigned char> mask_bytes;
  std::size_t mask_len = (k_total + 7) / 8;
  for (std::size_t i = 0; i < mask_len; ++i)
    mask_bytes.push_back(detail::get<std::uint8_t>(bytes, off, path));
  std::size_t payload_end = off;
  std::uint64_t stored = detail::get<std::uint64_t>(bytes, off, path);
  std::vector<unsigned char> payload(bytes.begin() + static_cast<std::ptrdiff_t>(payload_begin),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(payload_end));
  if (detail::fnv1a64(payload) != stored)
    throw data_error(path + ": payload checksum mismatch");

  model.set_params(std::move(params));
  ParamPartition part;
  part.mask.resize(k_total);
  for (std::size_t i = 0; i < k_total; ++i)
    part.mask[i] = (mask_bytes[i / 8] >> (i % 8)) & 1u;
  return {std::move(model), std::move(part)};
}

}  // namespace pcdef
