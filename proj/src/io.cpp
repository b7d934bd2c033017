#include "pipla/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace pipla {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

void write_pgm(const std::string& path, const Mat& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  f << "P5\n" << img.cols() << " " << img.rows() << "\n255\n";
  for (Eigen::Index i = 0; i < img.rows(); ++i)
    for (Eigen::Index j = 0; j < img.cols(); ++j) {
      const double v = std::clamp(std::round(img(i, j)), 0.0, 255.0);
      f.put(char(std::uint8_t(v)));
    }
  if (!f) throw io_error("write failed: " + path);
}

namespace {
std::string next_token(std::istream& in) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      tok += c;
      break;
    }
  }
  while (in.get(c) && !std::isspace(static_cast<unsigned char>(c))) tok += c;
  return tok;
}

std::uint32_t be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw io_error("truncated IDX header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) | b[3];
}
}  // namespace

Mat read_pgm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  if (next_token(f) != "P5") throw io_error(path + ": not a binary PGM (P5)");
  int w = 0, h = 0, maxv = 0;
  try {
    w = std::stoi(next_token(f));
    h = std::stoi(next_token(f));
    maxv = std::stoi(next_token(f));
  } catch (const std::exception&) {
    throw io_error(path + ": malformed PGM header");
  }
  if (w <= 0 || h <= 0 || maxv <= 0 || maxv > 255) throw io_error(path + ": unsupported PGM geometry/depth");
  Mat img(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      char c;
      if (!f.get(c)) throw io_error(path + ": truncated pixel data");
      img(i, j) = double(static_cast<unsigned char>(c)) * 255.0 / maxv;
    }
  return img;
}

IdxImages read_idx_images(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  if (be32(f) != 0x00000803u) throw io_error(path + ": bad IDX image magic");
  IdxImages out;
  out.count = int(be32(f));
  out.rows = int(be32(f));
  out.cols = int(be32(f));
  out.pixels.resize(std::size_t(out.count) * out.rows * out.cols);
  f.read(reinterpret_cast<char*>(out.pixels.data()), std::streamsize(out.pixels.size()));
  if (!f) throw io_error(path + ": truncated IDX image data");
  return out;
}

std::vector<std::uint8_t> read_idx_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  if (be32(f) != 0x00000801u) throw io_error(path + ": bad IDX label magic");
  std::vector<std::uint8_t> out(be32(f));
  f.read(reinterpret_cast<char*>(out.data()), std::streamsize(out.size()));
  if (!f) throw io_error(path + ": truncated IDX label data");
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot write " + path);
  f << content;
  if (!f) throw io_error("write failed: " + path);
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec || !std::filesystem::is_directory(path)) throw io_error("cannot create directory " + path);
}

}  // namespace pipla
