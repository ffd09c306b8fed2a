#include "rstab/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace rstab::io {

namespace {

void write_header(std::ostream& os, int m, bool areas, const std::string& var = "x") {
  os << "t";
  for (int i = 1; i <= m; ++i) os << "," << var << "_" << i;
  if (areas)
    for (int i = 1; i <= m; ++i)
      for (int j = 1; j <= m; ++j) os << ",A_" << i << j;
  os << "\n";
}

std::vector<double> split_row(const std::string& line, int lineno) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      double v = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
      row.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("malformed CSV cell '" + cell + "'", lineno);
    }
  }
  return row;
}

struct CsvData {
  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  int cols = 0;
};

CsvData read_rows(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw ParseError("cannot open " + file.string(), 0);
  CsvData data;
  std::string line;
  int lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("t,", 0) == 0) continue;  // header row
    }
    auto row = split_row(line, lineno);
    if (row.size() < 2) throw ParseError("row needs at least t and one value", lineno);
    if (data.cols == 0) data.cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != data.cols)
      throw ParseError("inconsistent column count", lineno);
    data.times.push_back(row.front());
    row.erase(row.begin());
    data.rows.push_back(std::move(row));
  }
  if (data.times.size() < 2) throw ParseError("need at least two rows", lineno);
  return data;
}

}  // namespace

void write_csv(const std::filesystem::path& file, const GridPath& path, const std::string& var) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.precision(17);
  write_header(os, path.dim(), false, var);
  for (int k = 0; k < path.size(); ++k) {
    os << path.times[static_cast<std::size_t>(k)];
    for (int i = 0; i < path.dim(); ++i) os << "," << path.values(i, k);
    os << "\n";
  }
}

void write_csv(const std::filesystem::path& file, const RoughPathGrid& rp) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.precision(17);
  const int m = rp.dim();
  write_header(os, m, true);
  for (int k = 0; k < rp.size(); ++k) {
    os << rp.base.times[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i) os << "," << rp.base.values(i, k);
    const Mat& A = rp.area0[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) os << "," << A(i, j);
    os << "\n";
  }
}

GridPath read_path_csv(const std::filesystem::path& file) {
  CsvData data = read_rows(file);
  const int m = data.cols - 1;
  Mat vals(m, static_cast<int>(data.times.size()));
  for (std::size_t k = 0; k < data.rows.size(); ++k)
    for (int i = 0; i < m; ++i) vals(i, static_cast<int>(k)) = data.rows[k][static_cast<std::size_t>(i)];
  return GridPath(std::move(data.times), std::move(vals));
}

RoughPathGrid read_lift_csv(const std::filesystem::path& file) {
  CsvData data = read_rows(file);
  // columns: m values + m^2 areas
  int m = -1;
  for (int cand = 1; cand * cand + cand <= data.cols - 1; ++cand)
    if (cand * cand + cand == data.cols - 1) m = cand;
  if (m < 1) throw ParseError("column count does not match m + m^2 layout", 1);
  const int n = static_cast<int>(data.times.size());
  Mat vals(m, n);
  std::vector<Mat> areas(static_cast<std::size_t>(n), Mat::Zero(m, m));
  for (int k = 0; k < n; ++k) {
    const auto& row = data.rows[static_cast<std::size_t>(k)];
    for (int i = 0; i < m; ++i) vals(i, k) = row[static_cast<std::size_t>(i)];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        areas[static_cast<std::size_t>(k)](i, j) = row[static_cast<std::size_t>(m + i * m + j)];
  }
  return RoughPathGrid(GridPath(std::move(data.times), std::move(vals)), std::move(areas));
}

namespace {

constexpr char kMagic[4] = {'R', 'S', 'P', 'B'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("binary container truncated");
  return v;
}

}  // namespace

void write_binary(const std::filesystem::path& file, const RoughPathGrid& rp) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + file.string());
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::uint32_t>(rp.dim()));
  put(os, static_cast<std::uint64_t>(rp.size()));
  for (double t : rp.base.times) put(os, t);
  for (int k = 0; k < rp.size(); ++k)
    for (int i = 0; i < rp.dim(); ++i) put(os, rp.base.values(i, k));
  for (const Mat& A : rp.area0)
    for (int i = 0; i < rp.dim(); ++i)
      for (int j = 0; j < rp.dim(); ++j) put(os, A(i, j));
}

RoughPathGrid read_binary(const std::filesystem::path& file) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != std::string(kMagic, 4))
    throw std::runtime_error("not a rough-path container");
  auto version = get<std::uint32_t>(is);
  if (version != kVersion) throw std::runtime_error("unsupported container version");
  int m = static_cast<int>(get<std::uint32_t>(is));
  int n = static_cast<int>(get<std::uint64_t>(is));
  std::vector<double> times(static_cast<std::size_t>(n));
  for (auto& t : times) t = get<double>(is);
  Mat vals(m, n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < m; ++i) vals(i, k) = get<double>(is);
  std::vector<Mat> areas(static_cast<std::size_t>(n), Mat::Zero(m, m));
  for (auto& A : areas)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = get<double>(is);
  return RoughPathGrid(GridPath(std::move(times), std::move(vals)), std::move(areas));
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void write_manifest(const std::filesystem::path& dir, const Manifest& m) {
  nlohmann::json j;
  j["command_line"] = m.command_line;
  j["config_hash"] = m.config_hash;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["wall_seconds"] = m.wall_seconds;
  j["outputs"] = m.outputs;
  std::ofstream os(dir / "manifest.json");
  if (!os) throw std::runtime_error("cannot write manifest in " + dir.string());
  os << j.dump(2) << "\n";
}

}  // namespace rstab::io
