#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "velopref/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"velopref: route-choice reward recovery on grid road networks"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  int threads = -1;
  long long seed = -1;

  const std::vector<std::string> names = {"gen-world", "gen-experts", "train",
                                          "rollout",   "evaluate",    "explain",
                                          "trip-stats"};
  const std::vector<std::string> descriptions = {
      "generate a synthetic world and planted rewards",
      "simulate expert trajectories from the planted rewards",
      "fit the reward network to the expert trajectories",
      "emit (real, synthetic, shortest) trajectory triples",
      "compute distribution and path similarity metrics",
      "attribute the learned reward to input features",
      "trip distance and decision-frequency statistics"};
  for (std::size_t i = 0; i < names.size(); ++i) {
    auto* sub = app.add_subcommand(names[i], descriptions[i]);
    sub->add_option("--config", config_path, "JSON run configuration")
        ->required();
    sub->add_option("--set", overrides,
                    "override a config key, e.g. --set train.epochs=50");
    sub->add_option("--threads", threads, "worker thread cap");
    sub->add_option("--seed", seed, "override the global seed");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    velopref::RunConfig cfg = velopref::RunConfig::load(config_path, overrides);
    if (threads >= 0) cfg.threads = threads;
    if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
    return velopref::run_command(app.get_subcommands().front()->get_name(), cfg);
  } catch (const velopref::ValidationError& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "validation"}}.dump()
              << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}, {"type", "runtime"}}.dump()
              << "\n";
    return 2;
  }
}
