#include "ghenergy/runner.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"ghenergy: energies of orthogonal almost-complex structures on conformally flat "
               "manifolds"};

  std::string config_path;
  std::string out_path;
  int threads = 1;
  bool verbose = false;
  bool schema = false;

  app.add_option("--config", config_path, "path to the JSON run configuration");
  app.add_option("--out", out_path, "override the report output path");
  app.add_option("--threads", threads, "worker threads (output is thread-count independent)");
  app.add_flag("--verbose", verbose, "print check outcomes to stderr");
  app.add_flag("--schema", schema, "print the JSON report schema and exit");

  CLI11_PARSE(app, argc, argv);

  if (schema) {
    std::cout << ghenergy::report_schema();
    return 0;
  }
  if (config_path.empty()) {
    std::cerr << "a --config file is required (or --schema)\n";
    return 2;
  }

  try {
    ghenergy::RunConfig config = ghenergy::load_config(config_path);
    if (!out_path.empty()) config.output.path = out_path;
    config.threads = threads;
    config.verbose = verbose;
    return ghenergy::run(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
