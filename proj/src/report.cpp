#include "driftlasso/report.hpp"

#include "driftlasso/errors.hpp"
#include "driftlasso/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

namespace driftlasso {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
  return s;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

// Blue (negative) through white to red (positive).
std::string diverging(double t) {
  t = std::clamp(t, -1.0, 1.0);
  int r, g, b;
  if (t >= 0.0) {
    r = 255;
    g = static_cast<int>(std::lround(255.0 * (1.0 - t)));
    b = g;
  } else {
    b = 255;
    r = static_cast<int>(std::lround(255.0 * (1.0 + t)));
    g = r;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw InvalidInput("CSV row width does not match header");
  rows_.push_back(std::move(cells));
  return *this;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

std::string cell(double v) { return format_double(v); }
std::string cell(int v) { return std::to_string(v); }
std::string cell(std::uint64_t v) { return std::to_string(v); }
std::string cell(bool v) { return v ? "1" : "0"; }

std::string line_plot_svg(const PlotSpec& spec, const std::vector<Series>& series) {
  const double width = 640, height = 420, left = 70, right = 150, top = 40, bottom = 55;
  const double pw = width - left - right, ph = height - top - bottom;
  auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double e = i < s.err.size() ? s.err[i] : 0.0;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      const double lo = spec.logy ? s.y[i] : s.y[i] - e;
      y0 = std::min(y0, ty(std::max(lo, spec.logy ? 1e-300 : -INFINITY)));
      y1 = std::max(y1, ty(s.y[i] + e));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double ypad = 0.05 * (y1 - y0);
  y0 -= ypad;
  y1 += ypad;
  auto px = [&](double v) { return left + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return top + ph - (ty(v) - y0) / (y1 - y0) * ph; };
  auto py_raw = [&](double t) { return top + ph - (t - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = x0 + (x1 - x0) * i / 4.0, fy = y0 + (y1 - y0) * i / 4.0;
    const double sx = left + pw * i / 4.0, sy = py_raw(fy);
    o << "<line x1=\"" << fixed(sx) << "\" y1=\"" << top + ph << "\" x2=\"" << fixed(sx) << "\" y2=\""
      << top + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(sx) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << tick_label(spec.logx ? std::pow(10.0, fx) : fx) << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << fixed(sy) << "\" x2=\"" << left << "\" y2=\"" << fixed(sy)
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left - 8 << "\" y=\"" << fixed(sy + 4) << "\" text-anchor=\"end\">"
      << tick_label(spec.logy ? std::pow(10.0, fy) : fy) << "</text>\n";
  }
  o << "<text x=\"" << fixed(left + pw / 2) << "\" y=\"" << height - 12 << "\" text-anchor=\"middle\">"
    << escape(spec.xlabel) << "</text>\n";
  o << "<text x=\"16\" y=\"" << fixed(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << fixed(top + ph / 2) << ")\">" << escape(spec.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << fixed(px(s.x[i])) << ',' << fixed(py(s.y[i]));
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i < s.err.size() && s.err[i] > 0.0) {
        const double lo = spec.logy ? std::max(s.y[i] - s.err[i], std::pow(10.0, y0)) : s.y[i] - s.err[i];
        o << "<line x1=\"" << fixed(px(s.x[i])) << "\" y1=\"" << fixed(py(lo)) << "\" x2=\"" << fixed(px(s.x[i]))
          << "\" y2=\"" << fixed(py(s.y[i] + s.err[i])) << "\" stroke=\"" << color << "\"/>\n";
      }
      if (spec.markers)
        o << "<circle cx=\"" << fixed(px(s.x[i])) << "\" cy=\"" << fixed(py(s.y[i])) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << fixed(ly) << "\" x2=\"" << left + pw + 32 << "\" y2=\""
      << fixed(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << left + pw + 38 << "\" y=\"" << fixed(ly + 4) << "\">" << escape(s.name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string heatmap_svg(const std::string& title, const std::vector<std::pair<std::string, Matrix>>& panels) {
  double vmax = 0.0;
  Eigen::Index rows = 1, cols = 1;
  for (const auto& [name, m] : panels) {
    if (m.size() > 0) vmax = std::max(vmax, m.cwiseAbs().maxCoeff());
    rows = std::max(rows, m.rows());
    cols = std::max(cols, m.cols());
  }
  if (!(vmax > 0.0)) vmax = 1.0;
  const double cellw = std::clamp(360.0 / static_cast<double>(cols), 4.0, 28.0);
  const double cellh = std::clamp(360.0 / static_cast<double>(rows), 4.0, 28.0);
  const double panel_w = cellw * static_cast<double>(cols), panel_h = cellh * static_cast<double>(rows);
  const double gap = 30, left = 20, top = 60;
  const double width = left + static_cast<double>(panels.size()) * (panel_w + gap) + 80;
  const double height = top + panel_h + 50;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width) << "\" height=\"" << fixed(height)
    << "\" viewBox=\"0 0 " << fixed(width) << ' ' << fixed(height)
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& [name, m] = panels[k];
    const double ox = left + static_cast<double>(k) * (panel_w + gap);
    o << "<text x=\"" << fixed(ox + panel_w / 2) << "\" y=\"" << top - 8 << "\" text-anchor=\"middle\">"
      << escape(name) << "</text>\n";
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        o << "<rect x=\"" << fixed(ox + cellw * static_cast<double>(c)) << "\" y=\""
          << fixed(top + cellh * static_cast<double>(r)) << "\" width=\"" << fixed(cellw) << "\" height=\""
          << fixed(cellh) << "\" fill=\"" << diverging(m(r, c) / vmax) << "\" stroke=\"#dddddd\"/>\n";
    o << "<rect x=\"" << fixed(ox) << "\" y=\"" << top << "\" width=\"" << fixed(panel_w) << "\" height=\""
      << fixed(panel_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
  }
  // colour bar
  const double bx = width - 60, bh = panel_h;
  for (int i = 0; i < 20; ++i) {
    const double t = 1.0 - 2.0 * (i + 0.5) / 20.0;
    o << "<rect x=\"" << fixed(bx) << "\" y=\"" << fixed(top + bh * i / 20.0) << "\" width=\"14\" height=\""
      << fixed(bh / 20.0 + 0.5) << "\" fill=\"" << diverging(t) << "\"/>\n";
  }
  o << "<text x=\"" << fixed(bx + 18) << "\" y=\"" << top + 10 << "\">" << tick_label(vmax) << "</text>\n";
  o << "<text x=\"" << fixed(bx + 18) << "\" y=\"" << fixed(top + bh / 2 + 4) << "\">0</text>\n";
  o << "<text x=\"" << fixed(bx + 18) << "\" y=\"" << fixed(top + bh) << "\">" << tick_label(-vmax) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot read '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 init failed");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

OutputSet::OutputSet(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string OutputSet::path(const std::string& name) const {
  return (std::filesystem::path(dir_) / name).string();
}

void OutputSet::write(const std::string& name, const std::string& content) {
  std::ofstream out(path(name), std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write '" + path(name) + "'");
  out << content;
  if (!out) throw InvalidInput("write failed for '" + path(name) + "'");
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
}

void OutputSet::write_json(const std::string& name, const nlohmann::json& doc) {
  write(name, doc.dump(2) + "\n");
}

void OutputSet::write_manifest(const nlohmann::json& extra) const {
  nlohmann::json doc = extra;
  nlohmann::json list = nlohmann::json::array();
  for (const auto& f : files_) {
    list.push_back({{"path", f},
                    {"bytes", std::filesystem::file_size(path(f))},
                    {"sha256", sha256_file(path(f))}});
  }
  doc["files"] = list;
  std::ofstream out(path("manifest.json"), std::ios::binary | std::ios::trunc);
  out << doc.dump(2) << "\n";
}

}  // namespace driftlasso
