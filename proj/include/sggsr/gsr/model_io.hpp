#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "sggsr/gsr/model.hpp"

namespace sggsr::gsr {

inline constexpr char kModelMagic[8] = {'S', 'G', 'G', 'S', 'R', 'M', 'D', 'L'};
inline constexpr std::uint32_t kModelVersion = 1;

// model.bin layout, all little-endian:
//   magic[8] version:u32 layers:u32 heads:u32 hidden:u32 in_dim:u32 classes:u32
//   per layer, per head: rows:u32 cols:u32 then rows*cols f32 (row-major)
inline void write_model(const ModelParams<float>& p, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + file.string());
  auto put = [&](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
  };
  out.write(kModelMagic, 8);
  put(kModelVersion);
  put(static_cast<std::uint32_t>(p.num_layers()));
  put(static_cast<std::uint32_t>(p.arch.num_heads));
  put(static_cast<std::uint32_t>(p.arch.hidden_dim));
  put(static_cast<std::uint32_t>(p.arch.in_dim));
  put(static_cast<std::uint32_t>(p.arch.num_classes));
  for (const auto& layer : p.weights) {
    for (const auto& w : layer) {
      put(static_cast<std::uint32_t>(w.rows()));
      put(static_cast<std::uint32_t>(w.cols()));
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        std::uint32_t bits;
        std::memcpy(&bits, w.data() + i, 4);
        put(bits);
      }
    }
  }
}

inline ModelParams<float> read_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("missing file " + file.string());
  auto get = [&]() {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ConfigError(file.string() + ": truncated model");
    return std::uint32_t{b[0]} | std::uint32_t{b[1]} << 8 | std::uint32_t{b[2]} << 16 | std::uint32_t{b[3]} << 24;
  };
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kModelMagic, 8) != 0)
    throw ConfigError(file.string() + ": not a model file");
  if (const auto v = get(); v != kModelVersion)
    throw ConfigError(file.string() + ": unsupported model version " + std::to_string(v));
  ModelParams<float> p;
  p.arch.num_layers = get();
  p.arch.num_heads = get();
  p.arch.hidden_dim = get();
  p.arch.in_dim = get();
  p.arch.num_classes = get();
  for (std::size_t l = 0; l < p.arch.num_layers; ++l) {
    std::vector<Mat<float>> heads;
    for (std::size_t h = 0; h < p.arch.num_heads; ++h) {
      const auto rows = get(), cols = get();
      Mat<float> w(rows, cols);
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const std::uint32_t bits = get();
        std::memcpy(w.data() + i, &bits, 4);
      }
      heads.push_back(std::move(w));
    }
    p.weights.push_back(std::move(heads));
  }
  return p;
}

}  // namespace sggsr::gsr
