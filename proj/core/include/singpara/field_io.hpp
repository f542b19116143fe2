#pragma once

/// @file field_io.hpp
/// @brief CSV import/export of space-time nodal fields.
///
/// One block per slice. Each block starts with the header line
/// `dim,nodes,slice,time` followed by one line with those four values, then
/// the nodal values row-major: a single row in 1D, `nodes` rows of `nodes`
/// values in 2D (row j holds y-index j).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "singpara/grid.hpp"

namespace singpara {

struct FieldFile {
  int dim = 1;
  int nodes = 0;
  std::vector<int> slices;
  std::vector<double> times;
  /// values[b] holds the nodal values of block b.
  std::vector<std::vector<double>> values;
};

/// Formats a double with round-trip precision; output is deterministic.
std::string format_double(double v);

/// Writes slices [first, last] (inclusive) of g, every `stride` slices.
void write_field_csv(std::ostream& out, const Grid& grid, const GridFunction& g, int first = 0,
                     int last = -1, int stride = 1);

FieldFile read_field_csv(std::istream& in);
FieldFile read_field_csv(const std::filesystem::path& path);

/// Converts a parsed file to a GridFunction on `grid`; throws GridError
/// unless the file holds every slice 0..M with matching dimension and nodes.
GridFunction to_grid_function(const FieldFile& file, const Grid& grid);

}  // namespace singpara
