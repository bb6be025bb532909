// nlwave command-line tool.
//
// Exit codes: 0 every verdict passed, 1 a verdict failed, 2 operational error.

#include "nlwave/config.hpp"
#include "nlwave/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

namespace {

constexpr int kError = 2;

struct Command {
  std::string name;
  std::string kind;
  std::string help;
};

const std::vector<Command> kCommands{
    {"simulate", "simulate", "integrate one trajectory"},
    {"equilibria", "equilibria", "find stationary states and their spectra"},
    {"check-assumptions", "check_assumptions", "scan the structural assumptions of the model"},
    {"probe-dissipativity", "dissipativity", "absorbing ball in the energy space"},
    {"probe-dissipativity-e1", "dissipativity_e1", "boundedness in the strong phase space"},
    {"probe-lipschitz", "lipschitz", "Lipschitz growth of nearby trajectories"},
    {"probe-quasistability", "quasistability", "quasi-stability constant across batches"},
    {"probe-attractor", "attractor", "convergence to the stationary set"},
    {"probe-convergence", "convergence", "Galerkin convergence in the mode count"},
};

void print_report(const nlwave::RunManifest& m) {
  std::printf("%s: %s\n", m.report.name.empty() ? "run" : m.report.name.c_str(), nlwave::status_name(m.status).c_str());
  for (const auto& [k, v] : m.report.verdicts) std::printf("  verdict %-28s %s\n", k.c_str(), v ? "pass" : "FAIL");
  for (const auto& [k, v] : m.report.scalars) std::printf("  %-36s %.10g\n", k.c_str(), v);
  std::printf("output: %s\n", m.directory.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral Galerkin lab for damped semilinear wave equations"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;

  std::vector<std::pair<CLI::App*, const Command*>> subs;
  for (const auto& c : kCommands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config,-c", config_path, "YAML or JSON run configuration");
    sub->add_option("--set", overrides, "override one key, section.key=value")->type_name("KEY=VALUE");
    subs.emplace_back(sub, &c);
  }
  auto* version = app.add_subcommand("version", "print the version and platform");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  if (version->parsed()) {
    std::printf("nlwave %s\n", nlwave::version().c_str());
    for (const auto& [k, v] : nlwave::platform_fingerprint()) std::printf("  %s: %s\n", k.c_str(), v.c_str());
    return 0;
  }

  for (const auto& [sub, cmd] : subs) {
    if (!sub->parsed()) continue;
    try {
      const nlwave::RunConfig cfg = config_path.empty() ? nlwave::parse_config("", overrides, cmd->kind)
                                                        : nlwave::load_config(config_path, overrides, cmd->kind);
      const nlwave::RunManifest m = nlwave::run(cfg);
      print_report(m);
      if (m.status == nlwave::RunStatus::error) std::fprintf(stderr, "error: %s\n", m.error.c_str());
      return nlwave::exit_code(m);
    } catch (const std::exception& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return kError;
    }
  }
  return kError;
}
