#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

// Logs go to stderr so trajectories and reports on stdout stay clean.
void init_logging() {
  auto logger = spdlog::stderr_color_mt("cyclic-swarm");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CYCLIC_SWARM_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level != spdlog::level::off || std::string_view(env) == "off") spdlog::set_level(level);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace cyclic_swarm::cli;
  init_logging();

  CLI::App app{"Cyclic pursuit swarms under broadcast control"};
  app.require_subcommand(1);

  RunOptions run;
  std::string out;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "simulate a scenario and write its trajectory");
  run_cmd->add_option("--config", run.config, "scenario JSON")->required();
  run_cmd->add_option("--out", out, "trajectory file (events go to <out>.events.jsonl)");
  run_cmd->add_option("--format", run.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  auto* run_seed = run_cmd->add_option("--seed-override", seed, "sample initial positions from this seed");

  std::filesystem::path predict_config;
  auto* predict_cmd = app.add_subcommand("predict", "print closed-form predictions and bounds");
  predict_cmd->add_option("--config", predict_config, "scenario JSON")->required();
  auto* predict_seed = predict_cmd->add_option("--seed-override", seed, "sample initial positions from this seed");

  VerifyOptions verify;
  std::string events;
  auto* verify_cmd = app.add_subcommand("verify", "check a trajectory against the model's properties");
  verify_cmd->add_option("--trace", verify.trace, "trajectory file")->required();
  verify_cmd->add_option("--config", verify.config, "scenario JSON used for the run")->required();
  verify_cmd->add_option("--events", events, "capture events (default <trace>.events.jsonl)");
  auto* verify_seed = verify_cmd->add_option("--seed-override", seed, "seed used for the run");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "run a live steerable session on /session");
  serve_cmd->add_option("--config", serve.config, "scenario JSON")->required();
  serve_cmd->add_option("--port", serve.port, "TCP port (0 picks one)")->capture_default_str();
  serve_cmd->add_option("--address", serve.address, "listen address")->capture_default_str();
  serve_cmd->add_option("--tick-ms", serve.tick_ms, "wall-clock ms between snapshots")->capture_default_str();
  serve_cmd->add_option("--cadence", serve.cadence, "simulation steps per snapshot at speed 1")
      ->capture_default_str()->check(CLI::PositiveNumber);
  auto* serve_seed = serve_cmd->add_option("--seed-override", seed, "sample initial positions from this seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  return guarded(
      [&]() -> int {
        if (*run_cmd) {
          if (!out.empty()) run.out = out;
          if (*run_seed) run.seed_override = seed;
          return cmd_run(run, std::cout);
        }
        if (*predict_cmd) return cmd_predict(predict_config, *predict_seed ? std::optional(seed) : std::nullopt, std::cout);
        if (*verify_cmd) {
          if (!events.empty()) verify.events = events;
          if (*verify_seed) verify.seed_override = seed;
          return cmd_verify(verify, std::cout);
        }
        if (*serve_seed) serve.seed_override = seed;
        return cmd_serve(serve);
      },
      std::cerr);
}
