#include "singpara/field_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "singpara/errors.hpp"

namespace singpara {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

double parse_number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("field CSV: cannot parse number '" + s + "'");
  }
}

bool next_content_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_field_csv(std::ostream& out, const Grid& grid, const GridFunction& g, int first,
                     int last, int stride) {
  if (!g.matches(grid)) throw GridError("field does not match grid");
  if (last < 0) last = grid.time_steps();
  const int n = grid.nodes_per_axis();
  const int rows = grid.dim() == 1 ? 1 : n;
  for (int m = first; m <= last; m += std::max(stride, 1)) {
    out << "dim,nodes,slice,time\n"
        << grid.dim() << ',' << n << ',' << m << ',' << format_double(grid.time(m)) << '\n';
    const auto s = g.slice(m);
    for (int j = 0; j < rows; ++j) {
      for (int i = 0; i < n; ++i) {
        if (i) out << ',';
        out << format_double(s[grid.index(i, j)]);
      }
      out << '\n';
    }
  }
}

FieldFile read_field_csv(std::istream& in) {
  FieldFile file;
  std::string line;
  bool first = true;
  while (next_content_line(in, line)) {
    if (line.rfind("dim", 0) != 0) throw ConfigError("field CSV: expected header, got '" + line + "'");
    if (!next_content_line(in, line)) throw ConfigError("field CSV: truncated header");
    const auto head = split(line);
    if (head.size() != 4) throw ConfigError("field CSV: header needs dim,nodes,slice,time");
    const int dim = static_cast<int>(parse_number(head[0]));
    const int nodes = static_cast<int>(parse_number(head[1]));
    if ((dim != 1 && dim != 2) || nodes < 2) throw ConfigError("field CSV: bad dimensions");
    if (first) {
      file.dim = dim;
      file.nodes = nodes;
      first = false;
    } else if (dim != file.dim || nodes != file.nodes) {
      throw ConfigError("field CSV: inconsistent block dimensions");
    }
    file.slices.push_back(static_cast<int>(parse_number(head[2])));
    file.times.push_back(parse_number(head[3]));
    const int rows = dim == 1 ? 1 : nodes;
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(rows) * nodes);
    for (int j = 0; j < rows; ++j) {
      if (!next_content_line(in, line)) throw ConfigError("field CSV: truncated block");
      const auto cells = split(line);
      if (static_cast<int>(cells.size()) != nodes) throw ConfigError("field CSV: row length mismatch");
      for (const auto& c : cells) values.push_back(parse_number(c));
    }
    file.values.push_back(std::move(values));
  }
  return file;
}

FieldFile read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open field file " + path.string());
  return read_field_csv(in);
}

GridFunction to_grid_function(const FieldFile& file, const Grid& grid) {
  if (file.dim != grid.dim() || file.nodes != grid.nodes_per_axis()) {
    throw GridError("field file dimensions do not match the grid");
  }
  if (static_cast<int>(file.values.size()) != grid.time_steps() + 1) {
    throw GridError("field file must hold every slice 0..M of the grid");
  }
  GridFunction g = GridFunction::zeros(grid);
  for (std::size_t b = 0; b < file.values.size(); ++b) {
    const int m = file.slices[b];
    if (m < 0 || m > grid.time_steps()) throw GridError("field file slice index out of range");
    auto dst = g.slice(m);
    std::copy(file.values[b].begin(), file.values[b].end(), dst.begin());
  }
  return g;
}

}  // namespace singpara
