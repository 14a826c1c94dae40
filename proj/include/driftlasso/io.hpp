#pragma once

#include "driftlasso/simulate.hpp"

#include <iosfwd>
#include <string>

namespace driftlasso {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

/// CSV with header `t,x_1,...,x_d` and one row per observation time.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_csv(std::istream& in);

/// Binary container, all fields little-endian:
///
///   offset  size  field
///   0       4     magic "DLTR"
///   4       4     uint32 format version (1)
///   8       8     uint64 rows (n + 1)
///   16      8     uint64 cols (d)
///   24      8     float64 delta_n
///   32      8     uint64 seed
///   40      8*rows*cols  float64 states, row-major
void write_trajectory_binary(const Trajectory& traj, std::ostream& out);
Trajectory read_trajectory_binary(std::istream& in);

void save_trajectory(const Trajectory& traj, const std::string& path);
/// Chooses the format by extension: `.csv` text, anything else binary.
Trajectory load_trajectory(const std::string& path);

}  // namespace driftlasso
