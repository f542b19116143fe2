#pragma once

/// @file experiments.hpp
/// @brief Runnable studies: level ladder, uniqueness, regularity, the
/// explicit-solution cross-check and manufactured-solution verification.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singpara/config.hpp"
#include "singpara/estimates.hpp"

namespace singpara {

/// Process exit codes shared by every study.
enum ExitCode : int {
  exit_pass = 0,
  exit_config = 1,
  exit_refusal = 2,
  exit_failure = 3,
  exit_solver = 4,
};

struct StudyOutcome {
  std::string study;
  int exit_code = exit_pass;
  std::vector<EstimateReport> rows;
  nlohmann::json summary = nlohmann::json::object();

  /// Exit code from the verdicts: 3 if any row failed, else 0.
  void settle();
};

struct RunOptions {
  /// Write fields/, monitors.csv and summary.json under this directory.
  std::optional<std::filesystem::path> output_dir;
};

/// Full monitor suite for one solved level. `previous` (the preceding rung)
/// adds the flux Cauchy row. Monitors whose hypotheses fail emit a
/// "skipped" row instead of disappearing.
std::vector<EstimateReport> rung_monitors(const StudyConfig& config, const ApproximateProblem& ap,
                                          const SolveResult& result,
                                          const SolveResult* previous = nullptr);

StudyOutcome run_validation(const StudyConfig& config, const RunOptions& options = {});
StudyOutcome run_single(const StudyConfig& config, int level, const RunOptions& options = {});
StudyOutcome run_convergence_study(const StudyConfig& config, const RunOptions& options = {});
StudyOutcome run_uniqueness_test(const StudyConfig& config, const RunOptions& options = {});
StudyOutcome run_regularity_study(const StudyConfig& config, const RunOptions& options = {});
StudyOutcome run_example_crosscheck(const StudyConfig& config, const RunOptions& options = {});
StudyOutcome run_manufactured(const StudyConfig& config, const RunOptions& options = {});

/// Writes monitors.csv and summary.json.
void write_outcome(const StudyOutcome& outcome, const std::filesystem::path& dir);

/// Writes fields/<name>.csv and fields/<name>.telemetry.json.
void write_solution(const std::filesystem::path& dir, const std::string& name, const Grid& grid,
                    const SolveResult& result);

/// Heat-equation oracle e^{-d pi^2 t / L^2} prod sin(pi (x - lo) / L).
double heat_oracle(const Box& box, const Point& x, double t);

}  // namespace singpara
