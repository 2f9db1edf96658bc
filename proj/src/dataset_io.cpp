#include <fstream>
#include <map>

#include "corrnet/csv.hpp"
#include "corrnet/dataset.hpp"
#include "corrnet/error.hpp"

namespace corrnet {

namespace fs = std::filesystem;

void store_dataset(const Dataset& dataset, const fs::path& dir) {
  const auto& st = dataset.stimuli;
  const auto& rs = dataset.responses;
  st.validate();
  rs.validate();
  if (st.trials() != rs.trials()) throw InvalidArgument("stimuli and responses differ in trial count");
  fs::create_directories(dir);
  {
    std::ofstream meta(dir / "meta.txt", std::ios::binary);
    if (!meta) throw IoError("cannot write " + (dir / "meta.txt").string());
    meta << "n=" << st.trials() << "\n"
         << "d1=" << rs.voxels() << "\n"
         << "d2=" << st.pixels() << "\n"
         << "rows=" << st.rows << "\n"
         << "cols=" << st.cols << "\n"
         << "standardized=" << (rs.standardized ? 1 : 0) << "\n";
  }
  csv::write_matrix(dir / "stimuli.csv", st.values);
  csv::write_matrix(dir / "responses.csv", rs.values);
  Matrix pos(rs.voxels(), 3);
  for (int j = 0; j < rs.voxels(); ++j) pos.row(j) = rs.layout[j].transpose();
  csv::write_matrix(dir / "positions.csv", pos);
  if (dataset.rf) csv::write_matrix(dir / "rf.csv", *dataset.rf);
  if (!st.categories.empty()) {
    std::ofstream cat(dir / "categories.csv", std::ios::binary);
    for (const auto& c : st.categories) cat << c << "\n";
  }
}

namespace {

std::map<std::string, long long> read_meta(const fs::path& path) {
  const auto lines = csv::read_lines(path);
  std::map<std::string, long long> meta;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto eq = lines[i].find('=');
    if (eq == std::string::npos) throw FormatError(path.string(), i + 1, "expected key=value");
    meta[lines[i].substr(0, eq)] =
        csv::parse_int(std::string_view(lines[i]).substr(eq + 1), path.string(), i + 1);
  }
  for (const char* key : {"n", "d1", "d2", "rows", "cols", "standardized"}) {
    if (!meta.count(key)) throw FormatError(path.string(), 0, std::string("missing key '") + key + "'");
  }
  return meta;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  const auto meta_path = dir / "meta.txt";
  const auto meta = read_meta(meta_path);
  const long n = static_cast<long>(meta.at("n"));
  const long d1 = static_cast<long>(meta.at("d1"));
  const long d2 = static_cast<long>(meta.at("d2"));
  if (meta.at("rows") * meta.at("cols") != d2) {
    throw FormatError(meta_path.string(), 0, "rows*cols differs from d2");
  }

  Dataset ds;
  auto& st = ds.stimuli;
  st.rows = static_cast<int>(meta.at("rows"));
  st.cols = static_cast<int>(meta.at("cols"));
  const auto stim_path = dir / "stimuli.csv";
  const Matrix stim = csv::read_matrix(stim_path, n, d2);
  for (Eigen::Index i = 0; i < stim.rows(); ++i) {
    for (Eigen::Index k = 0; k < stim.cols(); ++k) {
      if (stim(i, k) != 0.0 && stim(i, k) != 1.0) {
        throw FormatError(stim_path.string(), static_cast<std::size_t>(i + 1), "stimulus entries must be 0 or 1");
      }
    }
  }
  st.values = stim.cast<std::uint8_t>();

  const Matrix pos = csv::read_matrix(dir / "positions.csv", d1, 3);
  std::vector<Point3> positions;
  positions.reserve(static_cast<std::size_t>(d1));
  for (long j = 0; j < d1; ++j) positions.emplace_back(pos.row(j).transpose());
  try {
    ds.responses.layout = VoxelLayout(std::move(positions));
  } catch (const InvalidArgument& e) {
    throw FormatError((dir / "positions.csv").string(), 0, e.what());
  }
  ds.responses.values = csv::read_matrix(dir / "responses.csv", n, d1);
  ds.responses.standardized = meta.at("standardized") != 0;
  if (ds.responses.standardized) {
    ds.responses.zero_variance.assign(static_cast<std::size_t>(d1), 0);
    for (long j = 0; j < d1; ++j) {
      if ((ds.responses.values.col(j).array() == 0.0).all()) ds.responses.zero_variance[j] = 1;
    }
  }
  if (fs::exists(dir / "rf.csv")) ds.rf = csv::read_matrix(dir / "rf.csv", d1, d2);
  if (fs::exists(dir / "categories.csv")) {
    st.categories = csv::read_lines(dir / "categories.csv");
    if (static_cast<long>(st.categories.size()) != n) {
      throw FormatError((dir / "categories.csv").string(), st.categories.size(),
                        "expected one category per trial");
    }
  }
  return ds;
}

}  // namespace corrnet
