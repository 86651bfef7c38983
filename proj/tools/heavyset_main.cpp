#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "heavyset/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Heavy-set experiments for translations on compact groups"};
  app.require_subcommand(1);

  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;

  const char* names[][2] = {
      {"cf", "continued fraction, convergents and below-approximants of gamma"},
      {"heavy-scan", "heavy fractions over a grid at each horizon"},
      {"bound-check", "packing-dimension estimates of heavy sets against the bound"},
      {"verify", "run every cross-module invariant; exit 1 on an exact failure"},
      {"regularity", "ball-measure regularity constants of the group"},
  };
  for (const auto& [name, help] : names) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (created if missing)");
    sub->add_option("--seed", seed, "master seed, overrides the config");
    sub->add_option("--threads", threads, "worker threads for grid sweeps");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : heavyset::kExitConfig;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  heavyset::RunOptions options{out, seed, threads};
  return heavyset::run_command(command, config, options, std::cout, std::cerr);
}
