#pragma once

/// @file config.hpp
/// @brief JSON study configuration: problem data, grid, ladders, solver
/// settings and monitor panels. The schema is described in the README.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "singpara/grid.hpp"
#include "singpara/measures.hpp"
#include "singpara/problem.hpp"
#include "singpara/stepper.hpp"

namespace singpara {

struct MonitorPanels {
  std::vector<double> k_ladder{0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
  std::vector<double> eps_ladder{0.2, 0.1, 0.05, 0.025};
  std::vector<double> delta_ladder{0.4, 0.2, 0.1, 0.05};
  double trace_k = 1.0;
  double strip_k = 1.0;
  /// Exponent of the local gradient monitor; zero picks the midpoint of the
  /// admissible range when it exists.
  double q = 0.0;
};

struct StudyConfig {
  nlohmann::json raw;
  std::filesystem::path base_dir;
  Problem problem;
  int nodes = 129;
  int steps = 128;
  std::vector<int> n_ladder{4, 16, 64, 256};
  SolverConfig solver;
  MollifierConfig mollifier;
  MonitorPanels panels;
  bool warm_start = true;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 1;

  Grid grid() const;
};

/// Parses a field description. Recognised types: zero, constant, sine,
/// bump, radial_power, space_time_power, grid (CSV file, needs `grid`).
ScalarField parse_field(const nlohmann::json& spec, const Box& box, double horizon,
                        const std::filesystem::path& base_dir, const Grid* grid);

SingularityProfile parse_singularity(const nlohmann::json& spec);

std::shared_ptr<const Flux> parse_flux(const nlohmann::json& spec, double p, const Box& box,
                                       double horizon, const std::filesystem::path& base_dir);

Box parse_box(const nlohmann::json& spec, int dim);

/// Builds the problem against the study grid (needed for gridded data and
/// for the mass of measure densities).
Problem parse_problem(const nlohmann::json& spec, const Grid& grid,
                      const std::filesystem::path& base_dir);

/// Parses a complete study document. `grid_override` replaces the grid
/// block (nodes per axis, time steps). Throws ConfigError on schema errors.
StudyConfig load_study(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       std::optional<std::pair<int, int>> grid_override = {});

StudyConfig load_study_file(const std::filesystem::path& path,
                            std::optional<std::pair<int, int>> grid_override = {});

/// Parses "NxM" into (nodes, steps).
std::pair<int, int> parse_grid_spec(const std::string& text);

}  // namespace singpara
