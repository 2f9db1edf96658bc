#include <map>

#include "corrnet/dataset.hpp"
#include "corrnet/error.hpp"

namespace corrnet {

namespace {

using Template = std::vector<std::string>;

// 12x12 geometric shapes.
const std::vector<std::pair<std::string, Template>>& geometry_table() {
  static const std::vector<std::pair<std::string, Template>> table = {
    {"plus",
     {".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      "############",
      "############",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##....."}},
    {"square",
     {"............",
      "............",
      "............",
      "...######...",
      "...######...",
      "...######...",
      "...######...",
      "...######...",
      "...######...",
      "............",
      "............",
      "............"}},
    {"cross",
     {"#..........#",
      ".#........#.",
      "..#......#..",
      "...#....#...",
      "....#..#....",
      ".....##.....",
      ".....##.....",
      "....#..#....",
      "...#....#...",
      "..#......#..",
      ".#........#.",
      "#..........#"}},
    {"frame",
     {"############",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "#..........#",
      "############"}},
    {"tee",
     {"............",
      ".##########.",
      ".##########.",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      ".....##.....",
      "............"}},
    {"ring",
     {"............",
      "............",
      "..########..",
      "..#......#..",
      "..#......#..",
      "..#......#..",
      "..#......#..",
      "..#......#..",
      "..#......#..",
      "..########..",
      "............",
      "............"}},
    {"diamond",
     {"............",
      ".....##.....",
      "....####....",
      "...######...",
      "..########..",
      ".##########.",
      ".##########.",
      "..########..",
      "...######...",
      "....####....",
      ".....##.....",
      "............"}},
    {"hbar",
     {"............",
      "............",
      "............",
      "............",
      "############",
      "############",
      "############",
      "############",
      "............",
      "............",
      "............",
      "............"}},
    {"vbar",
     {"....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####....",
      "....####...."}},
    {"corner",
     {"............",
      "..##........",
      "..##........",
      "..##........",
      "..##........",
      "..##........",
      "..##........",
      "..##........",
      "..##........",
      "..########..",
      "..########..",
      "............"}},
  };
  return table;
}

// Digits on a 5x7 stencil.
const std::vector<std::pair<std::string, Template>>& digit_table() {
  static const std::vector<std::pair<std::string, Template>> table = {
    {"digit0",
     {".###.",
      "#...#",
      "#..##",
      "#.#.#",
      "##..#",
      "#...#",
      ".###."}},
    {"digit1",
     {"..#..",
      ".##..",
      "..#..",
      "..#..",
      "..#..",
      "..#..",
      ".###."}},
    {"digit2",
     {".###.",
      "#...#",
      "....#",
      "...#.",
      "..#..",
      ".#...",
      "#####"}},
    {"digit3",
     {"#####",
      "...#.",
      "..#..",
      "...#.",
      "....#",
      "#...#",
      ".###."}},
    {"digit4",
     {"...#.",
      "..##.",
      ".#.#.",
      "#..#.",
      "#####",
      "...#.",
      "...#."}},
    {"digit5",
     {"#####",
      "#....",
      "####.",
      "....#",
      "....#",
      "#...#",
      ".###."}},
    {"digit6",
     {"..##.",
      ".#...",
      "#....",
      "####.",
      "#...#",
      "#...#",
      ".###."}},
    {"digit7",
     {"#####",
      "....#",
      "...#.",
      "..#..",
      ".#...",
      ".#...",
      ".#..."}},
    {"digit8",
     {".###.",
      "#...#",
      "#...#",
      ".###.",
      "#...#",
      "#...#",
      ".###."}},
    {"digit9",
     {".###.",
      "#...#",
      "#...#",
      ".####",
      "....#",
      "...#.",
      ".##.."}},
  };
  return table;
}

bool is_digit_shape(const std::string& name) { return name.rfind("digit", 0) == 0; }

}  // namespace

std::vector<std::string> shape_names(ShapeCatalog catalog) {
  std::vector<std::string> names;
  if (catalog != ShapeCatalog::Digits) {
    for (const auto& [name, _] : geometry_table()) names.push_back(name);
  }
  if (catalog != ShapeCatalog::Geometry) {
    for (const auto& [name, _] : digit_table()) names.push_back(name);
  }
  return names;
}

const std::vector<std::string>& shape_template(const std::string& name) {
  for (const auto* table : {&geometry_table(), &digit_table()}) {
    for (const auto& [n, t] : *table) {
      if (n == name) return t;
    }
  }
  throw InvalidArgument("unknown shape '" + name + "'");
}

StimulusSet generate_shape_stimuli(ShapeCatalog catalog, int rows, int cols, int repetitions) {
  if (rows < 1 || cols < 1) throw InvalidArgument("grid dimensions must be positive");
  if (repetitions < 1) throw InvalidArgument("repetitions must be positive");
  const auto names = shape_names(catalog);
  const int d2 = rows * cols;

  // Rasterize each template once; repeats are exact copies.
  std::vector<Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic>> rasters;
  for (const auto& name : names) {
    const auto& t = shape_template(name);
    const int th = static_cast<int>(t.size());
    const int tw = static_cast<int>(t.front().size());
    if (th > rows || tw > cols) {
      throw InvalidArgument("shape '" + name + "' (" + std::to_string(th) + "x" +
                            std::to_string(tw) + ") does not fit a " + std::to_string(rows) +
                            "x" + std::to_string(cols) + " grid");
    }
    const int r0 = (rows - th) / 2;
    const int c0 = (cols - tw) / 2;
    Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic> raster =
        Eigen::Matrix<std::uint8_t, 1, Eigen::Dynamic>::Zero(d2);
    for (int r = 0; r < th; ++r) {
      for (int c = 0; c < tw; ++c) {
        if (t[r][c] == '#') raster((r0 + r) * cols + (c0 + c)) = 1;
      }
    }
    rasters.push_back(std::move(raster));
  }

  StimulusSet s;
  s.rows = rows;
  s.cols = cols;
  const int n = static_cast<int>(names.size()) * repetitions;
  s.values.resize(n, d2);
  int i = 0;
  for (int rep = 0; rep < repetitions; ++rep) {
    for (std::size_t shape = 0; shape < names.size(); ++shape, ++i) {
      s.values.row(i) = rasters[shape];
      s.categories.push_back(is_digit_shape(names[shape]) ? "digit" : "geometry");
    }
  }
  return s;
}

}  // namespace corrnet
