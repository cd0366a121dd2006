#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "levelset/diagnostics.hpp"
#include "levelset/error.hpp"
#include "levelset/grid.hpp"

namespace lsk {

// 17 significant digits, so a value survives a text round trip.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path.string() + "'");
  return f;
}

inline void close_output(std::ofstream& f, const std::filesystem::path& path) {
  f.close();
  if (f.fail()) throw IoError("write failed for '" + path.string() + "'");
}

// Header row plus rows of already formatted cells.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw std::invalid_argument("csv: row width does not match header");
    rows_.push_back(std::move(row));
  }

  std::string str() const {
    std::string out = join(header_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  void write(const std::filesystem::path& path) const {
    auto f = open_output(path);
    f << str();
    close_output(f, path);
  }

  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;

  static std::string join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    return s + '\n';
  }
};

// step, tau, L1
inline CsvTable trace_table(const std::vector<double>& l1, double dtau) {
  CsvTable t({"step", "tau", "L1"});
  for (std::size_t i = 0; i < l1.size(); ++i)
    t.add({std::to_string(i + 1), format_real(dtau * static_cast<double>(i + 1)), format_real(l1[i])});
  return t;
}

inline CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
  CsvTable t({"grid", "N_c", "eps_h", "mapping", "norm", "value", "observed_order"});
  for (const auto& r : rows)
    t.add({r.grid, std::to_string(r.cells), format_real(r.eps_h), r.mapping, r.norm, format_real(r.value),
           r.observed_order ? format_real(*r.observed_order) : std::string()});
  return t;
}

// step, t, then one column per named series; all series share a length.
inline CsvTable series_table(const DiagnosticsReport& rep, const std::vector<std::string>& names, double dt) {
  std::vector<std::string> header{"step", "t"};
  std::size_t len = 0;
  for (const auto& n : names) {
    auto it = rep.series.find(n);
    if (it == rep.series.end()) throw std::invalid_argument("series_table: no series '" + n + "'");
    if (len && it->second.size() != len) throw std::invalid_argument("series_table: length mismatch for '" + n + "'");
    len = it->second.size();
    header.push_back(n);
  }
  CsvTable t(header);
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<std::string> row{std::to_string(i), format_real(dt * static_cast<double>(i))};
    for (const auto& n : names) row.push_back(format_real(rep.series.at(n)[i]));
    t.add(std::move(row));
  }
  return t;
}

// Legacy ASCII STRUCTURED_POINTS; points sit at the cell centres.
inline void write_vtk(const std::filesystem::path& path, const std::vector<std::pair<std::string, const ScalarField*>>& fields) {
  if (fields.empty()) throw std::invalid_argument("write_vtk: no fields");
  const Grid& g = fields.front().second->grid();
  for (const auto& [name, f] : fields)
    if (!(f->grid() == g)) throw std::invalid_argument("write_vtk: fields on different grids");
  auto out = open_output(path);
  out << "# vtk DataFile Version 3.0\nlevelset-kit fields\nASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << g.cells(0) << ' ' << g.cells(1) << ' ' << g.cells(2) << '\n';
  out << "ORIGIN " << format_real(g.center(0, 0)) << ' ' << format_real(g.dim() > 1 ? g.center(1, 0) : 0.0) << ' '
      << format_real(g.dim() > 2 ? g.center(2, 0) : 0.0) << '\n';
  out << "SPACING " << format_real(g.spacing(0)) << ' ' << format_real(g.dim() > 1 ? g.spacing(1) : 1.0) << ' '
      << format_real(g.dim() > 2 ? g.spacing(2) : 1.0) << '\n';
  out << "POINT_DATA " << g.interior_count() << '\n';
  for (const auto& [name, f] : fields) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    g.for_each_cell([&](int, int, int, std::size_t n) { out << format_real((*f)[n]) << '\n'; });
  }
  close_output(out, path);
}

}  // namespace lsk
