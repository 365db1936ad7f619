// starshape: solve prescribed Weingarten curvature problems for star-shaped surfaces.
//
//   starshape check  <cfg>
//   starshape solve  <cfg>
//   starshape verify <csv> <cfg>
//   starshape export <csv> <cfg> --format obj|csv [-o path]
//
// STARSHAPE_THREADS sets the number of assembly threads.

#include "starshape/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

int main(int argc, char** argv) {
  using namespace starshape;

  CLI::App app{"Star-shaped hypersurfaces with prescribed Weingarten curvature"};
  app.require_subcommand(1);
  app.fallthrough();

  CommandOptions options;
  if (const char* env = std::getenv("STARSHAPE_THREADS")) {
    try {
      options.threads = std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "error: STARSHAPE_THREADS must be an integer\n";
      return kExitInputError;
    }
  }
  std::string output_dir;
  app.add_option("--output-dir", output_dir, "Override the [output] dir of the config");

  std::string config, solution, destination;
  ExportFormat format = ExportFormat::Obj;
  const std::map<std::string, ExportFormat> formats{{"obj", ExportFormat::Obj},
                                                    {"csv", ExportFormat::Csv}};

  auto* check = app.add_subcommand("check", "Verify the structural hypotheses of a config");
  check->add_option("config", config, "Config file")->required();

  auto* solve = app.add_subcommand("solve", "Run the t-continuation and write results");
  solve->add_option("config", config, "Config file")->required();

  auto* verify = app.add_subcommand("verify", "Re-check residual and monitors of a stored solution");
  verify->add_option("solution", solution, "Solution CSV")->required();
  verify->add_option("config", config, "Config file")->required();

  auto* exp = app.add_subcommand("export", "Convert a stored solution");
  exp->add_option("solution", solution, "Solution CSV")->required();
  exp->add_option("config", config, "Config file")->required();
  exp->add_option("--format", format, "obj or csv")
      ->required()
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
  exp->add_option("-o,--output", destination, "Destination file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitInputError;
  }
  if (!output_dir.empty()) options.output_dir = output_dir;

  if (*check) return cmd_check(config, options, std::cout, std::cerr);
  if (*solve) return cmd_solve(config, options, std::cout, std::cerr);
  if (*verify) return cmd_verify(solution, config, options, std::cout, std::cerr);
  if (destination.empty()) destination = format == ExportFormat::Obj ? "surface.obj" : "solution.csv";
  return cmd_export(solution, config, format, destination, options, std::cout, std::cerr);
}
