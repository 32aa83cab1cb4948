#include "tbspec/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
  CLI::App app{"Spectral analysis of three-particle lattice Hamiltonians"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  int threads = 0;
  for (const std::string& name : tbspec::commands()) {
    CLI::App* sub = app.add_subcommand(name, "run the '" + name + "' experiment");
    sub->add_option("--config", config_path, "experiment configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "worker threads (overrides TBSPEC_THREADS)")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : tbspec::kExitValidation;
  }

  std::ifstream in(config_path);
  std::stringstream text;
  text << in.rdbuf();

  tbspec::RunOptions opts;
  if (!out_dir.empty()) opts.out_dir = out_dir;
  if (threads > 0) opts.threads = threads;
  const std::string command = app.get_subcommands().front()->get_name();
  return tbspec::run_text(command, text.str(), opts, std::cerr);
}
