#include "singpara/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include "singpara/errors.hpp"
#include "singpara/field_io.hpp"
#include "singpara/stepper.hpp"

namespace singpara {

using nlohmann::json;

void StudyOutcome::settle() {
  if (exit_code != exit_pass) return;
  for (const auto& r : rows) {
    if (r.verdict == Verdict::fail) {
      exit_code = exit_failure;
      return;
    }
  }
}

double heat_oracle(const Box& box, const Point& x, double t) {
  double v = 1.0;
  double rate = 0.0;
  for (int a = 0; a < box.dim; ++a) {
    const double l = box.side(a);
    v *= std::sin(M_PI * (x[a] - box.lo[a]) / l);
    rate += M_PI * M_PI / (l * l);
  }
  return std::exp(-rate * t) * v;
}

void write_solution(const std::filesystem::path& dir, const std::string& name, const Grid& grid,
                    const SolveResult& result) {
  const auto fields = dir / "fields";
  std::filesystem::create_directories(fields);
  {
    std::ofstream out(fields / (name + ".csv"));
    write_field_csv(out, grid, result.solution);
  }
  std::ofstream tel(fields / (name + ".telemetry.json"));
  tel << result.telemetry_json().dump(2) << '\n';
}

void write_outcome(const StudyOutcome& outcome, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "monitors.csv");
    write_report_header(out);
    for (const auto& r : outcome.rows) write_report_row(out, r);
  }
  json summary = outcome.summary;
  summary["study"] = outcome.study;
  summary["exit_code"] = outcome.exit_code;
  int counts[4] = {0, 0, 0, 0};
  for (const auto& r : outcome.rows) ++counts[static_cast<int>(r.verdict)];
  summary["verdicts"] = {{"pass", counts[0]}, {"fail", counts[1]}, {"info", counts[2]},
                         {"skipped", counts[3]}};
  std::ofstream out(dir / "summary.json");
  out << summary.dump(2) << '\n';
}

namespace {

EstimateReport skipped_row(const std::string& monitor, int level, const std::string& note) {
  EstimateReport r;
  r.monitor = monitor;
  r.level = level;
  r.verdict = Verdict::skipped;
  r.note = "hypotheses unmet: " + note;
  return r;
}

EstimateReport info_row(const std::string& monitor, int level, double value,
                        std::vector<std::pair<std::string, double>> params = {}) {
  EstimateReport r;
  r.monitor = monitor;
  r.level = level;
  r.value = value;
  r.params = std::move(params);
  r.verdict = Verdict::info;
  return r;
}

EstimateReport verdict_row(const std::string& monitor, int level, double value, double bound,
                           bool passed, std::vector<std::pair<std::string, double>> params = {}) {
  EstimateReport r = info_row(monitor, level, value, std::move(params));
  r.bound = bound;
  r.verdict = passed ? Verdict::pass : Verdict::fail;
  return r;
}

template <class Fn>
void append(std::vector<EstimateReport>& rows, Fn&& fn) {
  auto more = fn();
  rows.insert(rows.end(), more.begin(), more.end());
}

double default_q(const Problem& problem) {
  const double n = problem.box.dim;
  const double upper = problem.p - n / (n + 1.0);
  return upper > 1.0 ? 0.5 * (1.0 + upper) : 1.0;
}

double max_value(const GridFunction& g) {
  double v = 0.0;
  for (double x : g.values()) v = std::max(v, x);
  return v;
}

double l1_norm(const Grid& grid, const GridFunction& g) {
  return integrate_space_time(grid, g) >= 0.0 ? l1_distance(grid, g, GridFunction::zeros(grid))
                                              : 0.0;
}

StudyOutcome refusal(const std::string& study, const std::string& reason) {
  StudyOutcome o;
  o.study = study;
  o.exit_code = exit_refusal;
  o.summary["refused"] = reason;
  o.rows.push_back(skipped_row(study, 0, reason));
  return o;
}

void finish(StudyOutcome& outcome, const RunOptions& options) {
  outcome.settle();
  if (options.output_dir) write_outcome(outcome, *options.output_dir);
}

std::string level_name(int n) { return "u_n" + std::to_string(n); }

}  // namespace

std::vector<EstimateReport> rung_monitors(const StudyConfig& config, const ApproximateProblem& ap,
                                          const SolveResult& result, const SolveResult* previous) {
  const Problem& problem = config.problem;
  const Grid& grid = ap.grid;
  const int n = result.level;
  const MonitorPanels& panels = config.panels;
  std::vector<EstimateReport> rows;

  rows.push_back(linf_l1_monitor(result, problem, grid));

  std::vector<CutoffFunction> panel;
  try {
    panel = cutoff_panel(grid);
  } catch (const GridError& e) {
    rows.push_back(skipped_row("cutoff_panel", n, e.what()));
  }
  for (const auto& c : panel) {
    append(rows, [&] { return truncation_energy_monitor(result, grid, panels.k_ladder, c, problem.p); });
  }
  for (const auto& c : panel) rows.push_back(strip_energy_monitor(result, grid, panels.strip_k, c, problem.p));
  for (const auto& c : panel) rows.push_back(singular_mass_monitor(result, ap, c));
  try {
    append(rows, [&] {
      return boundary_trace_monitor(result, grid, panels.trace_k, panels.eps_ladder,
                                    {problem.singularity.gamma, problem.p, 0.05});
    });
  } catch (const GridError& e) {
    rows.push_back(skipped_row("boundary_trace", n, e.what()));
  }
  for (const auto& c : panel) rows.push_back(distributional_residual_monitor(result, problem, ap, c));
  for (const auto& c : panel) {
    append(rows, [&] { return delta_split_monitor(result, ap, c, panels.delta_ladder); });
  }
  if (!panel.empty()) {
    const double q = panels.q > 0.0 ? panels.q : default_q(problem);
    try {
      rows.push_back(gradient_energy_q_monitor(result, problem, grid, q, panel.front()));
    } catch (const HypothesisRefusal& e) {
      rows.push_back(skipped_row("gradient_energy_q", n, e.what()));
    }
  }
  rows.push_back(gradient_energy_p_monitor(result, grid, problem.p));
  if (previous) {
    rows.push_back(info_row("ladder_l1_gap", n, l1_distance(grid, result.solution, previous->solution),
                            {{"previous_n", previous->level}}));
    for (const auto& c : panel) {
      rows.push_back(info_row("flux_cauchy", n,
                              flux_cauchy_gap(grid, *ap.flux, result.solution, previous->solution, c),
                              {{"previous_n", previous->level}, {"cutoff", c.id()}}));
    }
  }
  return rows;
}

StudyOutcome run_validation(const StudyConfig& config, const RunOptions& options) {
  StudyOutcome o;
  o.study = "validate";
  const Problem& pr = config.problem;
  const Grid grid = config.grid();

  const ValidationReport s = validate_structure(*pr.flux, pr.box, pr.horizon, 1000, config.seed);
  o.rows.push_back(verdict_row("structure_alpha", 0, s.get("alpha"), 0.0, s.passed));
  o.rows.push_back(info_row("structure_beta", 0, s.get("beta")));
  o.summary["structure"] = {{"passed", s.passed},
                            {"failed_condition", s.failed_condition},
                            {"witness", s.witness},
                            {"alpha", s.get("alpha")},
                            {"beta", s.get("beta")}};

  const SingularityProfile& h = pr.singularity;
  const ValidationReport sv = validate_singularity(h, 200, 100.0 * h.s0);
  o.rows.push_back(verdict_row("singularity_envelope", 0, sv.get("envelope_ratio"), 1.0, sv.passed));
  o.summary["singularity"] = {{"passed", sv.passed},
                              {"failed_condition", sv.failed_condition},
                              {"witness", sv.witness},
                              {"gamma", h.gamma},
                              {"sigma", h.sigma()},
                              {"nonincreasing", h.nonincreasing}};

  json classes = json::array();
  std::vector<double> thetas{1.0};
  if (h.theta && *h.theta < 1.0) thetas.insert(thetas.begin(), *h.theta);
  for (double theta : thetas) {
    const SourceClass c = classify_source_regularity(pr, theta, grid);
    classes.push_back({{"theta", theta}, {"label", c.label}, {"norm", c.norm},
                       {"eligible", c.eligible}, {"note", c.note}});
    o.rows.push_back(info_row("source_class", 0, c.norm, {{"theta", theta}}));
  }
  o.summary["source_classes"] = classes;
  o.summary["exponent_window"] = pr.in_exponent_window();
  o.summary["mass_bound_constant"] = mass_bound_constant(pr, grid);
  o.summary["measure_mass"] = pr.measure.total_variation();

  if (!s.passed || !sv.passed) {
    o.exit_code = exit_refusal;
    o.summary["refused"] = !s.passed ? "flux violates " + s.failed_condition
                                     : "singularity violates " + sv.failed_condition;
  }
  finish(o, options);
  return o;
}

StudyOutcome run_single(const StudyConfig& config, int level, const RunOptions& options) {
  StudyOutcome o;
  o.study = "solve";
  const Grid grid = config.grid();
  try {
    const ApproximateProblem ap = build_approximation(config.problem, level, grid, config.mollifier);
    const SolveResult result = evolve(ap, config.solver);
    o.rows = rung_monitors(config, ap, result);
    o.summary["level"] = level;
    o.summary["telemetry"] = result.telemetry_json();
    o.summary["telemetry"].erase("steps");
    o.summary["l1_norm"] = l1_norm(grid, result.solution);
    if (options.output_dir) write_solution(*options.output_dir, level_name(level), grid, result);
  } catch (const SolverError& e) {
    o.exit_code = exit_solver;
    o.summary["solver_error"] = {{"message", e.what()}, {"time_step", e.time_step()},
                                 {"last_residual", e.last_residual()}};
  }
  finish(o, options);
  return o;
}

StudyOutcome run_convergence_study(const StudyConfig& config, const RunOptions& options) {
  StudyOutcome o;
  o.study = "converge";
  const Grid grid = config.grid();
  std::optional<SolveResult> previous;
  std::vector<double> gaps;
  std::map<int, std::vector<double>> singular_mass, strip_energy;
  json rungs = json::array();

  for (int n : config.n_ladder) {
    try {
      const ApproximateProblem ap = build_approximation(config.problem, n, grid, config.mollifier);
      const GridFunction* guess = config.warm_start && previous ? &previous->solution : nullptr;
      SolveResult result = evolve(ap, config.solver, guess);
      auto rows = rung_monitors(config, ap, result, previous ? &*previous : nullptr);
      for (const auto& r : rows) {
        if (r.monitor == "singular_mass") singular_mass[static_cast<int>(r.params[0].second)].push_back(r.value);
        if (r.monitor == "strip_energy") strip_energy[static_cast<int>(r.params[1].second)].push_back(r.value);
      }
      o.rows.insert(o.rows.end(), rows.begin(), rows.end());
      json rung = {{"n", n},
                   {"l1_norm", l1_norm(grid, result.solution)},
                   {"wall_seconds", result.wall_seconds},
                   {"picard_iterations", result.total_picard_iterations()},
                   {"newton_iterations", result.total_newton_iterations()},
                   {"mollifier_clamped", ap.widths.clamped}};
      if (previous) {
        gaps.push_back(l1_distance(grid, result.solution, previous->solution));
        rung["l1_gap_to_previous"] = gaps.back();
      }
      rungs.push_back(rung);
      if (options.output_dir) write_solution(*options.output_dir, level_name(n), grid, result);
      previous = std::move(result);
    } catch (const SolverError& e) {
      o.exit_code = exit_solver;
      o.summary["solver_error"] = {{"n", n}, {"message", e.what()}, {"time_step", e.time_step()},
                                   {"last_residual", e.last_residual()}};
      break;
    }
  }
  o.summary["rungs"] = rungs;

  if (previous && o.exit_code == exit_pass) {
    const int last = previous->level;
    const double norm = l1_norm(grid, previous->solution);
    o.summary["reference_level"] = last;
    if (!gaps.empty()) {
      // Strict decrease; rungs that coincide to round-off count as converged.
      const double floor = 1e-13 * std::max(norm, 1e-300);
      bool decreasing = true;
      bool saturated = false;
      for (std::size_t j = 1; j < gaps.size(); ++j) {
        if (gaps[j] <= floor && gaps[j - 1] <= floor) {
          saturated = true;
          continue;
        }
        if (!(gaps[j] < gaps[j - 1])) decreasing = false;
      }
      const double relative = norm > 0.0 ? gaps.back() / norm : 0.0;
      auto row = verdict_row("ladder_convergence", last, relative, 1e-3,
                             decreasing && relative <= 1e-3);
      if (saturated) row.note = "ladder saturated: consecutive rungs coincide";
      o.rows.push_back(row);
      o.summary["gaps"] = gaps;
      o.summary["final_relative_gap"] = relative;
      o.summary["gaps_decreasing"] = decreasing;
    }
    for (const auto& [cut, values] : singular_mass) {
      if (values.size() < 2) continue;
      const double gap = relative_gap(values[values.size() - 1], values[values.size() - 2]);
      o.rows.push_back(verdict_row("singular_mass_cauchy", last, gap, 0.1, gap <= 0.1,
                                   {{"cutoff", cut}}));
    }
    for (const auto& [cut, values] : strip_energy) {
      const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
      const double spread = *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? INFINITY : 1.0);
      o.rows.push_back(info_row("strip_energy_spread", last, spread, {{"cutoff", cut}}));
    }
  }
  finish(o, options);
  return o;
}

StudyOutcome run_uniqueness_test(const StudyConfig& config, const RunOptions& options) {
  const Problem& pr = config.problem;
  const SingularityProfile& h = pr.singularity;
  const json block = config.raw.value("uniqueness", json::object());
  if (!pr.measure.empty()) return refusal("uniqueness", "measure data must vanish");
  if (!h.nonincreasing) return refusal("uniqueness", "h is not declared nonincreasing");
  const ValidationReport sv = validate_singularity(h, 200, 100.0 * h.s0);
  if (!sv.passed) return refusal("uniqueness", "singularity violates " + sv.failed_condition);
  const Grid grid = config.grid();
  std::optional<double> theta = h.theta;
  if (block.contains("theta")) theta = block.at("theta").get<double>();
  if (!theta) return refusal("uniqueness", "no decay exponent theta declared");
  const SourceClass cls = classify_source_regularity(pr, *theta, grid);
  if (!cls.eligible) {
    return refusal("uniqueness", "source not in the finite-energy class (" + cls.label + "): " + cls.note);
  }

  StudyOutcome o;
  o.study = "uniqueness";
  const int level = block.value("level", config.n_ladder.back());
  const int half = std::max(1, level / 2);
  try {
    const ApproximateProblem ap = build_approximation(pr, level, grid, config.mollifier);
    // Path A: direct solve, Picard seeded with the previous slice.
    const SolveResult a = evolve(ap, config.solver);
    // Path B: level n/2 seeded with a constant state, then level n warm-started from it.
    GridFunction seed(grid.node_count(), grid.time_steps() + 1,
                      block.value("seed_state", max_value(ap.source) + 1.0));
    const ApproximateProblem ap_half = build_approximation(pr, half, grid, config.mollifier);
    const SolveResult b_half = evolve(ap_half, config.solver, &seed);
    const SolveResult b = evolve(ap, config.solver, &b_half.solution);

    const double norm = l1_norm(grid, a.solution);
    const double gap = l1_distance(grid, a.solution, b.solution);
    const double relative = norm > 0.0 ? gap / norm : gap;
    const double u_max = std::max(max_value(a.solution), 1.0);
    double worst_functional = 0.0;
    for (double k : {1.0, u_max}) {
      const double f = uniqueness_functional(grid, a.solution, b.solution, k);
      worst_functional = std::max(worst_functional, f);
      o.rows.push_back(verdict_row("uniqueness_functional", level, f, 1e-10, f <= 1e-10, {{"k", k}}));
    }
    o.rows.push_back(verdict_row("uniqueness_l1_gap", level, relative, 1e-8, relative <= 1e-8));
    o.rows.push_back(info_row("gradient_energy_p", level, gradient_energy(grid, a.solution, pr.p), {{"path", 0}}));
    o.rows.push_back(info_row("gradient_energy_p", level, gradient_energy(grid, b.solution, pr.p), {{"path", 1}}));
    o.summary = {{"level", level},
                 {"theta", *theta},
                 {"source_class", cls.label},
                 {"relative_l1_gap", relative},
                 {"functional", worst_functional},
                 {"scope", "agreement of two discrete solution paths; evidence for, not a proof of, "
                           "uniqueness of the continuous finite-energy solution"}};
    if (options.output_dir) {
      write_solution(*options.output_dir, "path_direct", grid, a);
      write_solution(*options.output_dir, "path_warm", grid, b);
    }
  } catch (const SolverError& e) {
    o.exit_code = exit_solver;
    o.summary["solver_error"] = {{"message", e.what()}, {"time_step", e.time_step()}};
  }
  finish(o, options);
  return o;
}

StudyOutcome run_regularity_study(const StudyConfig& config, const RunOptions& options) {
  StudyOutcome o;
  o.study = "regularity";
  const json block = config.raw.value("regularity", json::object());
  json cases = block.value("cases", json::array());
  if (cases.empty()) cases.push_back(json::object());
  bool refused = false;
  json case_summaries = json::array();

  auto case_config = [&](const json& patch) {
    json doc = config.raw;
    doc.erase("regularity");
    doc.merge_patch(patch);
    return load_study(doc, config.base_dir);
  };
  auto energy_ladder = [&](const StudyConfig& c, std::vector<double>& energies) {
    const Grid grid = c.grid();
    std::optional<SolveResult> previous;
    for (int n : c.n_ladder) {
      const ApproximateProblem ap = build_approximation(c.problem, n, grid, c.mollifier);
      SolveResult r = evolve(ap, c.solver, c.warm_start && previous ? &previous->solution : nullptr);
      energies.push_back(gradient_energy(grid, r.solution, c.problem.p));
      previous = std::move(r);
    }
  };
  auto upper_spread = [](const std::vector<double>& e) {
    const auto first = e.size() > 1 ? e.begin() + 1 : e.begin();
    const auto [lo, hi] = std::minmax_element(first, e.end());
    return *lo > 0.0 ? *hi / *lo : (*hi > 0.0 ? INFINITY : 1.0);
  };

  try {
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
      const json& patch = cases[ci];
      const StudyConfig c = case_config(patch.value("override", json::object()));
      const std::string label = patch.value("label", "case" + std::to_string(ci));
      const Problem& pr = c.problem;
      const double theta = patch.contains("theta") ? patch.at("theta").get<double>()
                                                   : pr.singularity.theta.value_or(-1.0);
      std::string reason;
      SourceClass cls;
      if (pr.singularity.gamma > 1.0) reason = "gamma > 1";
      else if (!pr.measure.empty()) reason = "measure data must vanish";
      else if (theta < 0.0) reason = "no decay exponent theta";
      else {
        cls = classify_source_regularity(pr, theta, c.grid());
        if (!cls.eligible) reason = "source not eligible (" + cls.label + "): " + cls.note;
      }
      if (!reason.empty()) {
        refused = true;
        auto row = skipped_row("regularity_energy", 0, reason);
        row.params = {{"case", static_cast<double>(ci)}};
        o.rows.push_back(row);
        case_summaries.push_back({{"label", label}, {"refused", reason}});
        continue;
      }
      std::vector<double> energies;
      energy_ladder(c, energies);
      for (std::size_t j = 0; j < energies.size(); ++j) {
        o.rows.push_back(info_row("regularity_energy", c.n_ladder[j], energies[j],
                                  {{"case", static_cast<double>(ci)}, {"theta", theta}}));
      }
      const double spread = upper_spread(energies);
      o.rows.push_back(verdict_row("regularity_bounded", c.n_ladder.back(), spread, 1.25,
                                   spread <= 1.25, {{"case", static_cast<double>(ci)}, {"theta", theta}}));
      case_summaries.push_back({{"label", label}, {"theta", theta}, {"source_class", cls.label},
                                {"source_norm", cls.norm}, {"energies", energies},
                                {"upper_spread", spread}});
    }
    if (block.contains("control")) {
      const json& control = block.at("control");
      json patch = control.value("override", json::object());
      patch["problem"]["singularity"] = {{"type", "constant"}, {"value", 1.0}};
      const StudyConfig c = case_config(patch);
      std::vector<double> energies;
      energy_ladder(c, energies);
      for (std::size_t j = 0; j < energies.size(); ++j) {
        o.rows.push_back(info_row("control_energy", c.n_ladder[j], energies[j]));
      }
      const double growth = energies.front() > 0.0 ? energies.back() / energies.front() : INFINITY;
      o.rows.push_back(info_row("control_growth", c.n_ladder.back(), growth));
      case_summaries.push_back({{"label", control.value("label", std::string("control"))},
                                {"energies", energies},
                                {"growth", growth},
                                {"note", "h = 1 with an L^1 source outside the finite-energy class"}});
    }
  } catch (const SolverError& e) {
    o.exit_code = exit_solver;
    o.summary["solver_error"] = {{"message", e.what()}, {"time_step", e.time_step()}};
  }
  o.summary["cases"] = case_summaries;
  o.settle();
  if (o.exit_code == exit_pass && refused) o.exit_code = exit_refusal;
  if (options.output_dir) write_outcome(o, *options.output_dir);
  return o;
}

StudyOutcome run_example_crosscheck(const StudyConfig& config, const RunOptions& options) {
  const Problem& base = config.problem;
  if (std::abs(base.p - 2.0) > 1e-12) return refusal("example", "the cross-check needs p = 2");
  if (!base.measure.empty()) return refusal("example", "measure data must vanish");
  const json block = config.raw.value("example", json::object());
  const std::vector<double> gammas = block.value("gammas", std::vector<double>{0.5});
  const double threshold = block.value("positivity_threshold", 1e-12);
  const Grid grid = config.grid();

  StudyOutcome o;
  o.study = "example";
  json items = json::array();
  try {
    // Step 1: heat flow with source f (h = 1), truncations inactive.
    Problem heat = base;
    heat.singularity = constant_profile(1.0);
    const GridFunction f = base.source.sample_on(grid);
    const GridFunction u0 = base.initial.sample_on(grid);
    const double data_max = std::max(max_value(f), max_value(u0));
    const int n_heat = static_cast<int>(std::min(std::ceil(data_max) + 1.0, 1e9));
    const ApproximateProblem ap_heat = build_approximation(heat, n_heat, grid, config.mollifier);
    const SolveResult bar = evolve(ap_heat, config.solver);
    if (options.output_dir) write_solution(*options.output_dir, "heat", grid, bar);

    double smallest = std::numeric_limits<double>::infinity();
    std::size_t worst_node = 0;
    int worst_slice = 0;
    for (int m = 1; m <= grid.time_steps(); ++m) {
      for (std::size_t i : grid.interior()) {
        if (bar.solution.at(m, i) < smallest) {
          smallest = bar.solution.at(m, i);
          worst_node = i;
          worst_slice = m;
        }
      }
    }
    if (!(smallest > threshold)) {
      return refusal("example", "heat solution not positive at node " + std::to_string(worst_node) +
                                    ", slice " + std::to_string(worst_slice) + " (value " +
                                    format_double(smallest) + ")");
    }
    for (double gamma : gammas) {
      if (gamma > 1.0) {
        o.rows.push_back(skipped_row("example_gap", 0, "gamma > 1 needs the stronger source class"));
        continue;
      }
      // Step 2: g = f * ubar^gamma.
      GridFunction g = GridFunction::zeros(grid);
      double h_max = 0.0;
      for (int m = 0; m <= grid.time_steps(); ++m) {
        for (std::size_t i = 0; i < grid.node_count(); ++i) {
          const double ub = m == 0 ? u0.at(0, i) : bar.solution.at(m, i);
          g.at(m, i) = f.at(m, i) * std::pow(std::max(ub, 0.0), gamma);
          if (m > 0 && !grid.is_boundary(i)) h_max = std::max(h_max, std::pow(ub, -gamma));
        }
      }
      // Step 3: the singular problem through the level-n pipeline, with n above
      // every value of h on the range of ubar.
      Problem singular = base;
      singular.singularity = power_profile(gamma);
      singular.source = ScalarField::from_samples("f*ubar^gamma", std::move(g));
      const int n = static_cast<int>(std::ceil(std::max(h_max, data_max))) + 1;
      const ApproximateProblem ap = build_approximation(singular, n, grid, config.mollifier);
      const SolveResult u = evolve(ap, config.solver);
      const double gap = l1_distance(grid, u.solution, bar.solution) / l1_norm(grid, bar.solution);
      o.rows.push_back(verdict_row("example_gap", n, gap, 1e-6, gap <= 1e-6, {{"gamma", gamma}}));
      items.push_back({{"gamma", gamma}, {"level", n}, {"relative_l1_gap", gap}});
      if (options.output_dir) {
        write_solution(*options.output_dir, "singular_gamma" + format_double(gamma), grid, u);
      }
    }
  } catch (const SolverError& e) {
    o.exit_code = exit_solver;
    o.summary["solver_error"] = {{"message", e.what()}, {"time_step", e.time_step()}};
  }
  o.summary["cases"] = items;
  finish(o, options);
  return o;
}

namespace {

// Final-time L^2 error of the implicit Euler heat solve against the oracle.
double heat_error(const StudyConfig& config, const Box& box, double horizon, int nodes, int steps) {
  Problem pr = config.problem;
  pr.horizon = horizon;
  pr.box = box;
  pr.initial = ScalarField::from_formula("heat_oracle",
                                         [box](const Point& x, double) { return heat_oracle(box, x, 0.0); });
  pr.measure = RadonMeasure(box, horizon);
  const Grid grid = build_grid(box, horizon, nodes, steps);
  const ApproximateProblem ap = build_approximation(pr, 1, grid, config.mollifier);
  const SolveResult r = evolve(ap, config.solver);
  const auto last = r.solution.slice(steps);
  const auto w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < last.size(); ++i) {
    const double e = last[i] - heat_oracle(box, grid.coordinate(i), horizon);
    s += w[i] * e * e;
  }
  return std::sqrt(s);
}

}  // namespace

StudyOutcome run_manufactured(const StudyConfig& config, const RunOptions& options) {
  const Problem& pr = config.problem;
  if (std::abs(pr.p - 2.0) > 1e-12) return refusal("manufactured", "the heat oracle needs p = 2");
  if (!pr.measure.empty()) return refusal("manufactured", "measure data must vanish");
  const Grid base_grid = config.grid();
  if (max_value(pr.source.sample_on(base_grid)) != 0.0) {
    return refusal("manufactured", "the heat oracle needs f = 0");
  }
  const json block = config.raw.value("manufactured", json::object());
  const double horizon = block.value("horizon", 0.1);
  const double dt_factor = block.value("dt_factor", 1.0);
  const std::vector<int> spatial = block.value("spatial_nodes", std::vector<int>{17, 33, 65, 129});
  const int temporal_nodes = block.value("temporal_nodes", 257);
  const std::vector<int> temporal = block.value("temporal_steps", std::vector<int>{16, 32, 64, 128});
  const int nodes_2d = block.value("nodes_2d", 33);

  StudyOutcome o;
  o.study = "manufactured";
  Box box1 = pr.box;
  box1.dim = 1;
  try {
    std::vector<double> hs, es;
    for (int nodes : spatial) {
      const double h = box1.side(0) / (nodes - 1);
      const int steps = static_cast<int>(std::ceil(horizon / (dt_factor * h * h)));
      const double e = heat_error(config, box1, horizon, nodes, steps);
      hs.push_back(h);
      es.push_back(e);
      o.rows.push_back(info_row("heat_error_space", nodes, e, {{"h", h}, {"steps", steps}}));
    }
    std::vector<double> dts, ets;
    for (int steps : temporal) {
      const double e = heat_error(config, box1, horizon, temporal_nodes, steps);
      dts.push_back(horizon / steps);
      ets.push_back(e);
      o.rows.push_back(info_row("heat_error_time", temporal_nodes, e, {{"dt", horizon / steps}}));
    }
    const double space_order = log_log_slope(hs, es);
    const double time_order = log_log_slope(dts, ets);
    o.rows.push_back(verdict_row("spatial_order", 0, space_order, 1.8, space_order >= 1.8));
    o.rows.push_back(verdict_row("temporal_order", 0, time_order, 0.9, time_order >= 0.9));

    Box box2 = pr.box;
    box2.dim = 2;
    if (pr.box.dim == 1) {
      box2.lo[1] = box1.lo[0];
      box2.hi[1] = box1.hi[0];
    }
    const double h2 = box2.side(0) / (nodes_2d - 1);
    const int steps2 = static_cast<int>(std::ceil(horizon / (dt_factor * h2 * h2)));
    const double e2 = heat_error(config, box2, horizon, nodes_2d, steps2);
    const double e1 = heat_error(config, box1, horizon, nodes_2d, steps2);
    o.rows.push_back(info_row("heat_error_2d", nodes_2d, e2, {{"steps", steps2}}));
    o.rows.push_back(info_row("heat_error_1d_matched", nodes_2d, e1, {{"steps", steps2}}));
    o.summary = {{"spatial_order", space_order},
                 {"temporal_order", time_order},
                 {"spatial_errors", es},
                 {"temporal_errors", ets},
                 {"error_2d", e2},
                 {"error_1d_matched", e1}};
  } catch (const SolverError& e) {
    o.exit_code = exit_solver;
    o.summary["solver_error"] = {{"message", e.what()}, {"time_step", e.time_step()}};
  }
  finish(o, options);
  return o;
}

}  // namespace singpara
