#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "pfactor/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"p-factor analysis of singular nonlinear systems"};
  app.set_help_flag("--help", "Print this help message and exit");

  pfactor::cli::CommandRequest req;
  bool dump_config = false;
  app.add_option("command", req.command, "analyze | solve | kkt | optimality | cone | interp | certify");
  app.add_option("--problem", req.problem_path, "Problem file (JSON)");
  app.add_flag("--dump-config", dump_config, "Print every default and exit");

  struct Flag {
    const char* name;
    const char* key;
    const char* help;
  };
  const Flag flags[] = {
      {"--p", "p", "Order p (analyze/solve: largest order; interp: correction order)"},
      {"--h", "h", "Direction h as a JSON array"},
      {"--x0", "x0", "Start or base point as a JSON array"},
      {"--tol", "tol", "Tolerance"},
      {"--seed", "seed", "Seed for sampling commands"},
      {"--out", "out", "Output directory"},
      {"--convention", "convention", "plain | factorial"},
      {"--samples", "samples", "Sample count"},
      {"--eps", "eps", "certify: ball radius; interp: JSON array of steps"},
      {"--omega", "omega", "Singular certificate step along h"},
      {"--nu", "nu", "Singular certificate sampling radius"},
      {"--n", "n", "Interpolation degree"},
      {"--max-iters", "max_iters", "Iteration cap"},
      {"--normalize-h", "normalize_h", "true | false"},
      {"--reestimate", "reestimate", "Re-estimate the weakly active set each step (true | false)"},
      {"--theta", "theta", "Scale of the weakly active threshold"},
  };
  std::map<std::string, std::optional<std::string>> raw;
  for (const auto& f : flags) app.add_option(f.name, raw[f.key], f.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return pfactor::cli::kExitInput;
  }

  if (dump_config) {
    std::cout << pfactor::cli::default_config().dump(2) << '\n';
    return pfactor::cli::kExitOk;
  }
  if (req.command.empty()) {
    std::cerr << app.help();
    return pfactor::cli::kExitInput;
  }
  for (const auto& [key, value] : raw) {
    if (value) req.options[key] = *value;
  }
  return pfactor::cli::run(req, std::cout, std::cerr);
}
