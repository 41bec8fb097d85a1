#pragma once

#include <stdexcept>
#include <string>

namespace cyclic_swarm {

// Scenario or command failed validation. Maps to CLI exit code 2.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// File missing/unreadable, socket bind failure. Maps to CLI exit code 3.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed trajectory or event stream.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two independent computations of one quantity disagree: a bug, not bad input.
struct ConsistencyError : std::logic_error {
  using std::logic_error::logic_error;
};

// RHS evaluated with two distinct active agents at the same point.
struct EventHandlingError : std::logic_error {
  using std::logic_error::logic_error;
};

// A single unguarded step carried a chaser past more than one prey.
struct StepTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cyclic_swarm
