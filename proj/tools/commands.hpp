#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <ostream>
#include <optional>
#include <string>

namespace cyclic_swarm::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kIo = 3, kVerifyFailed = 4 };

struct RunOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::string format;  // "jsonl", "csv" or empty (from the extension, default jsonl)
  std::optional<std::uint64_t> seed_override;
};

struct VerifyOptions {
  std::filesystem::path trace;
  std::filesystem::path config;
  std::optional<std::filesystem::path> events;
  std::optional<std::uint64_t> seed_override;
};

struct ServeOptions {
  std::filesystem::path config;
  std::string address{"127.0.0.1"};
  std::uint16_t port{8765};
  int tick_ms{50};
  std::size_t cadence{50};
  std::optional<std::uint64_t> seed_override;
};

// Each command writes its report to `out` and throws the library's error
// types; exit_code_for maps them.
int cmd_run(const RunOptions& o, std::ostream& out);
int cmd_predict(const std::filesystem::path& config, std::optional<std::uint64_t> seed_override,
                std::ostream& out);
int cmd_verify(const VerifyOptions& o, std::ostream& out);
int cmd_serve(const ServeOptions& o);

int exit_code_for(const std::exception& e);

/// Runs `body`, printing any error to `err`, and returns the exit code.
template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace cyclic_swarm::cli
