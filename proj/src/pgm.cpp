#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corrnet/error.hpp"
#include "corrnet/evaluation.hpp"

namespace corrnet {

void render_pgm(const Matrix& image, const std::filesystem::path& path, int max_val) {
  if (max_val < 1 || max_val > 255) throw InvalidArgument("PGM max value must lie in [1, 255]");
  std::vector<char> payload;
  payload.reserve(static_cast<std::size_t>(image.size()));
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const double v = std::round(image(r, c));
      if (!(v >= 0.0 && v <= max_val)) throw InvalidArgument("PGM pixel outside [0, max_val]");
      payload.push_back(static_cast<char>(static_cast<unsigned char>(v)));
    }
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "P5\n" << image.cols() << ' ' << image.rows() << '\n' << max_val << '\n';
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

PgmImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string(), 0, "cannot open file");
  std::string magic;
  int cols = 0, rows = 0, max_val = 0;
  in >> magic >> cols >> rows >> max_val;
  if (magic != "P5" || cols < 0 || rows < 0 || max_val < 1 || max_val > 255) {
    throw FormatError(path.string(), 1, "not an 8-bit binary PGM");
  }
  in.get();  // single whitespace after the header
  PgmImage img;
  img.max_val = max_val;
  img.pixels.resize(rows, cols);
  std::vector<char> payload(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (in.gcount() != static_cast<std::streamsize>(payload.size())) {
    throw FormatError(path.string(), 0, "truncated PGM payload");
  }
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      img.pixels(r, c) = static_cast<unsigned char>(payload[static_cast<std::size_t>(r) * cols + c]);
    }
  }
  return img;
}

}  // namespace corrnet
