#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "singpara/config.hpp"
#include "singpara/errors.hpp"
#include "singpara/experiments.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<unsigned> seed;
  std::string grid;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("config", flags.config, "Study configuration (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out, "Output directory");
  cmd->add_option("--seed", flags.seed, "Seed for randomized checks");
  cmd->add_option("--grid", flags.grid, "Grid override, nodes x steps (e.g. 129x128)");
}

singpara::StudyConfig load(const CommonFlags& flags) {
  std::optional<std::pair<int, int>> grid;
  if (!flags.grid.empty()) grid = singpara::parse_grid_spec(flags.grid);
  singpara::StudyConfig config = singpara::load_study_file(flags.config, grid);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out.empty()) config.output_dir = flags.out;
  return config;
}

void report(const singpara::StudyOutcome& outcome) {
  int failed = 0;
  for (const auto& r : outcome.rows) {
    if (r.verdict == singpara::Verdict::fail) {
      std::cout << "FAIL " << r.monitor << " n=" << r.level << " " << r.params_string()
                << " value=" << r.value;
      if (r.bound) std::cout << " bound=" << *r.bound;
      std::cout << '\n';
      ++failed;
    }
  }
  std::cout << outcome.study << ": " << outcome.rows.size() << " rows, " << failed
            << " failed, exit " << outcome.exit_code << '\n';
  if (outcome.summary.contains("refused")) {
    std::cout << "refused: " << outcome.summary["refused"].get<std::string>() << '\n';
  }
  if (outcome.summary.contains("solver_error")) {
    std::cout << "solver error: " << outcome.summary["solver_error"].dump() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncation-and-limit solver for singular parabolic problems with measure data"};
  app.require_subcommand(1);
  CommonFlags flags;
  int level = 0;

  auto* validate = app.add_subcommand("validate", "Check structure conditions and classify the data");
  auto* solve = app.add_subcommand("solve", "Solve the approximate problem at one level");
  auto* converge = app.add_subcommand("converge", "Run the n-ladder with all monitors");
  auto* uniqueness = app.add_subcommand("uniqueness", "Two-path uniqueness test");
  auto* regularity = app.add_subcommand("regularity", "Gradient energy across the ladder per theta case");
  auto* example = app.add_subcommand("example", "Heat-flow versus singular-pipeline cross-check");
  auto* manufactured = app.add_subcommand("manufactured", "Refinement ladder against the heat oracle");
  for (auto* cmd : {validate, solve, converge, uniqueness, regularity, example, manufactured}) {
    add_common(cmd, flags);
  }
  solve->add_option("--n", level, "Truncation level")->required()->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    const singpara::StudyConfig config = load(flags);
    singpara::RunOptions options;
    if (!config.output_dir.empty()) options.output_dir = config.output_dir;
    singpara::StudyOutcome outcome;
    if (*validate) outcome = singpara::run_validation(config, options);
    else if (*solve) outcome = singpara::run_single(config, level, options);
    else if (*converge) outcome = singpara::run_convergence_study(config, options);
    else if (*uniqueness) outcome = singpara::run_uniqueness_test(config, options);
    else if (*regularity) outcome = singpara::run_regularity_study(config, options);
    else if (*example) outcome = singpara::run_example_crosscheck(config, options);
    else outcome = singpara::run_manufactured(config, options);
    report(outcome);
    return outcome.exit_code;
  } catch (const singpara::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return singpara::exit_config;
  } catch (const singpara::HypothesisRefusal& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return singpara::exit_refusal;
  } catch (const singpara::GridError& e) {
    std::cerr << "grid error: " << e.what() << '\n';
    return singpara::exit_config;
  } catch (const singpara::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return singpara::exit_config;
  }
}
