#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include "antijam/channel.hpp"
#include "antijam/common.hpp"

namespace antijam {

// Binary block trace: "AJTR" magic, version, M, L_cp, N header followed by
// the P x N ybar samples as little-endian interleaved re/im doubles,
// column (block) major.

inline void dump_blocks(const BlockSequence& blocks, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("dump_blocks: cannot open " + path);
  f.write("AJTR", 4);
  const std::uint32_t version = 1, m = blocks.m, l_cp = blocks.l_cp;
  const std::uint64_t n = blocks.blocks();
  f.write(reinterpret_cast<const char*>(&version), sizeof version);
  f.write(reinterpret_cast<const char*>(&m), sizeof m);
  f.write(reinterpret_cast<const char*>(&l_cp), sizeof l_cp);
  f.write(reinterpret_cast<const char*>(&n), sizeof n);
  for (int col = 0; col < blocks.blocks(); ++col) {
    for (int row = 0; row < blocks.ybar.rows(); ++row) {
      const double re = blocks.ybar(row, col).real();
      const double im = blocks.ybar(row, col).imag();
      f.write(reinterpret_cast<const char*>(&re), sizeof re);
      f.write(reinterpret_cast<const char*>(&im), sizeof im);
    }
  }
  if (!f) throw std::runtime_error("dump_blocks: write failed for " + path);
}

inline BlockSequence load_blocks(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_blocks: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::string(magic, 4) != "AJTR")
    throw std::runtime_error("load_blocks: bad magic in " + path);
  std::uint32_t version = 0, m = 0, l_cp = 0;
  std::uint64_t n = 0;
  f.read(reinterpret_cast<char*>(&version), sizeof version);
  f.read(reinterpret_cast<char*>(&m), sizeof m);
  f.read(reinterpret_cast<char*>(&l_cp), sizeof l_cp);
  f.read(reinterpret_cast<char*>(&n), sizeof n);
  if (!f || version != 1) throw std::runtime_error("load_blocks: bad header");
  BlockSequence blocks;
  blocks.m = static_cast<int>(m);
  blocks.l_cp = static_cast<int>(l_cp);
  const int p = blocks.m + blocks.l_cp;
  blocks.ybar.resize(p, static_cast<int>(n));
  blocks.y.resize(blocks.m, static_cast<int>(n));
  for (std::uint64_t col = 0; col < n; ++col) {
    for (int row = 0; row < p; ++row) {
      double re = 0.0, im = 0.0;
      f.read(reinterpret_cast<char*>(&re), sizeof re);
      f.read(reinterpret_cast<char*>(&im), sizeof im);
      blocks.ybar(row, static_cast<int>(col)) = cxd(re, im);
    }
    blocks.y.col(static_cast<int>(col)) =
        blocks.ybar.col(static_cast<int>(col)).tail(blocks.m);
  }
  if (!f) throw std::runtime_error("load_blocks: truncated file " + path);
  return blocks;
}

}  // namespace antijam
