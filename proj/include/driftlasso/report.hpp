#pragma once

#include "driftlasso/model.hpp"

#include <json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace driftlasso {

/// In-memory CSV table: comma separated, header row, LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string cell(double v);
std::string cell(int v);
std::string cell(std::uint64_t v);
std::string cell(bool v);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  ///< optional symmetric error bars
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  bool markers = true;
};

/// Static line chart with optional error bars.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series);

/// Side-by-side heatmaps on one diverging linear scale symmetric about 0,
/// with the scale maximum set to the largest |entry| across all panels.
std::string heatmap_svg(const std::string& title,
                        const std::vector<std::pair<std::string, Matrix>>& panels);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Tracks the files an experiment writes into its output directory and
/// emits manifest.json listing each with its size and SHA-256.
class OutputSet {
 public:
  explicit OutputSet(std::string dir);

  const std::string& dir() const noexcept { return dir_; }
  std::string path(const std::string& name) const;

  void write(const std::string& name, const std::string& content);
  void write(const std::string& name, const CsvTable& table) { write(name, table.str()); }
  void write_json(const std::string& name, const nlohmann::json& doc);

  const std::vector<std::string>& files() const noexcept { return files_; }

  /// Writes manifest.json; `extra` is merged into the top-level object.
  void write_manifest(const nlohmann::json& extra) const;

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

}  // namespace driftlasso
