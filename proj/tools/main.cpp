#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fejer_cli/commands.hpp"

int main(int argc, char** argv) {
  using fejer::cli::Overrides;
  CLI::App app{"fejer: subgradient method for equilibrium problems, certified bounds and checks"};
  app.require_subcommand(1);

  std::string config;
  Overrides o;
  std::string g_text;
  std::string out_dir;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--k", o.k, "accuracy index k");
    sub->add_option("--g", g_text, "counterfunction, constant:C or affine:P:C");
    sub->add_option("--seed", o.seed, "seed for sampled checks");
    sub->add_option("--out", out_dir, "output directory");
  };
  auto* solve = app.add_subcommand("solve", "run the iteration and write the trajectory CSV");
  common(solve);
  auto* rates = app.add_subcommand("rates", "print the certified bound table");
  common(rates);
  auto* verify = app.add_subcommand("verify", "run the check suite");
  common(verify);
  verify->add_option("--cap", o.cap_digits, "feasibility cap as a number of decimal digits");
  verify->add_option("--checks", o.checks, "comma separated check selection");
  verify->add_option("--trajectory", o.trajectory, "verify a stored CSV instead of solving");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!g_text.empty()) o.g = fejer::Counterfunction::parse(g_text);
  } catch (const fejer::InvalidConfig& e) {
    std::cerr << "config error: --g: " << e.what() << '\n';
    return fejer::cli::kConfigError;
  }
  if (!out_dir.empty()) o.out = out_dir;
  const std::string command = app.get_subcommands().front()->get_name();
  return fejer::cli::dispatch(command, config, o, std::cout, std::cerr);
}
