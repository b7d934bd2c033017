#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pipla/core.hpp"

namespace pipla {

// 17 significant digits, shortest round-trip form not required
std::string fmt17(double v);

// quotes fields containing comma, quote or newline
std::string csv_escape(const std::string& s);

// 8-bit binary PGM; values are rounded and clipped to [0,255]
void write_pgm(const std::string& path, const Mat& img);
Mat read_pgm(const std::string& path);

struct IdxImages {
  int count = 0, rows = 0, cols = 0;
  std::vector<std::uint8_t> pixels;
};
IdxImages read_idx_images(const std::string& path);
std::vector<std::uint8_t> read_idx_labels(const std::string& path);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);
void ensure_dir(const std::string& path);

}  // namespace pipla
