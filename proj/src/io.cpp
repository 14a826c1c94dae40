#include "driftlasso/io.hpp"

#include "driftlasso/errors.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace driftlasso {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary trajectory I/O assumes a little-endian host");

constexpr std::array<char, 4> kMagic{'D', 'L', 'T', 'R'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw InvalidInput("truncated binary trajectory");
  return v;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw InvalidInput("cannot parse number '" + s + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw InvalidInput("cannot format number");
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
  out << 't';
  for (int k = 1; k <= traj.dim(); ++k) out << ",x_" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i) {
    out << format_double(static_cast<double>(i) * traj.delta_n);
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k)
      out << ',' << format_double(traj.states(i, k));
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty trajectory CSV");
  const auto header = split_line(line);
  if (header.size() < 2 || header[0] != "t") throw InvalidInput("trajectory CSV header must start with 't'");
  const std::size_t d = header.size() - 1;
  for (std::size_t k = 0; k < d; ++k)
    if (header[k + 1] != "x_" + std::to_string(k + 1))
      throw InvalidInput("unexpected column '" + header[k + 1] + "'");

  std::vector<double> times, values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != d + 1) throw InvalidInput("row has wrong number of columns");
    times.push_back(parse_double(cells[0]));
    for (std::size_t k = 0; k < d; ++k) values.push_back(parse_double(cells[k + 1]));
  }
  if (times.size() < 2) throw InvalidInput("trajectory needs at least two rows");
  Trajectory traj;
  const auto rows = static_cast<Eigen::Index>(times.size());
  traj.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Eigen::Index>(d));
  traj.delta_n = (times.back() - times.front()) / static_cast<double>(rows - 1);
  if (!(traj.delta_n > 0.0)) throw InvalidInput("time column must be increasing");
  return traj;
}

void write_trajectory_binary(const Trajectory& traj, std::ostream& out) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.states.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(traj.states.cols()));
  put<double>(out, traj.delta_n);
  put<std::uint64_t>(out, traj.seed);
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i)
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) put<double>(out, traj.states(i, k));
}

Trajectory read_trajectory_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw InvalidInput("not a binary trajectory (bad magic)");
  if (get<std::uint32_t>(in) != kVersion) throw InvalidInput("unsupported trajectory version");
  const auto rows = get<std::uint64_t>(in);
  const auto cols = get<std::uint64_t>(in);
  if (rows < 2 || cols < 1 || rows > (1ULL << 40) / cols) throw InvalidInput("bad trajectory shape");
  Trajectory traj;
  traj.delta_n = get<double>(in);
  traj.seed = get<std::uint64_t>(in);
  traj.states.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < traj.states.rows(); ++i)
    for (Eigen::Index k = 0; k < traj.states.cols(); ++k) traj.states(i, k) = get<double>(in);
  return traj;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  std::ofstream out(path, csv ? std::ios::out : std::ios::out | std::ios::binary);
  if (!out) throw InvalidInput("cannot open '" + path + "' for writing");
  if (csv)
    write_trajectory_csv(traj, out);
  else
    write_trajectory_binary(traj, out);
}

Trajectory load_trajectory(const std::string& path) {
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  std::ifstream in(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  return csv ? read_trajectory_csv(in) : read_trajectory_binary(in);
}

}  // namespace driftlasso
