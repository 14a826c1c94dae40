#include "driftlasso/errors.hpp"
#include "driftlasso/io.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace driftlasso;

namespace {

Trajectory sample() {
  return simulate_ou_exact(Matrix::Identity(3, 3), 40, 0.01, 12, true);
}

}  // namespace

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324,
                   std::numeric_limits<double>::max()}) {
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v) << format_double(v);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(3.0), "3");
}

TEST(TrajectoryCsv, RoundTripIsExact) {
  const auto traj = sample();
  std::stringstream buf;
  write_trajectory_csv(traj, buf);
  std::string header;
  std::getline(buf, header);
  EXPECT_EQ(header, "t,x_1,x_2,x_3");
  buf.seekg(0);
  const auto back = read_trajectory_csv(buf);
  EXPECT_TRUE(back.states == traj.states);
  EXPECT_NEAR(back.delta_n, traj.delta_n, 1e-15);
}

TEST(TrajectoryCsv, MalformedRejected) {
  std::stringstream bad("t,x_1\n0,1\n0.1,abc\n");
  EXPECT_THROW(read_trajectory_csv(bad), InvalidInput);
  std::stringstream ragged("t,x_1,x_2\n0,1,2\n0.1,1\n");
  EXPECT_THROW(read_trajectory_csv(ragged), InvalidInput);
}

TEST(TrajectoryBinary, RoundTripAndLayout) {
  const auto traj = sample();
  std::stringstream buf;
  write_trajectory_binary(traj, buf);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 40u + 8u * 41u * 3u);
  EXPECT_EQ(bytes.substr(0, 4), "DLTR");
  buf.seekg(0);
  const auto back = read_trajectory_binary(buf);
  EXPECT_TRUE(back.states == traj.states);
  EXPECT_EQ(back.delta_n, traj.delta_n);
  EXPECT_EQ(back.seed, traj.seed);
  std::stringstream corrupt("XXXX" + bytes.substr(4));
  EXPECT_THROW(read_trajectory_binary(corrupt), InvalidInput);
  std::stringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(read_trajectory_binary(truncated), InvalidInput);
}

TEST(TrajectoryFiles, ExtensionSelectsFormat) {
  const auto dir = std::filesystem::temp_directory_path() / "driftlasso_io_test";
  std::filesystem::create_directories(dir);
  const auto traj = sample();
  for (const char* name : {"a.csv", "a.bin"}) {
    const auto path = (dir / name).string();
    save_trajectory(traj, path);
    EXPECT_TRUE(load_trajectory(path).states == traj.states);
  }
  std::filesystem::remove_all(dir);
}
