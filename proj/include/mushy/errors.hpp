#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mushy {

/// Invalid or inconsistent run configuration (bad parameter, malformed file).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A trajectory produced a non-finite value; carries the failing step and time.
class PathAbortError : public std::runtime_error {
  public:
    PathAbortError(std::uint64_t step, double time, std::uint64_t replica)
        : std::runtime_error("non-finite state at step " + std::to_string(step) + ", t=" +
                             std::to_string(time) + ", replica " + std::to_string(replica)),
          step(step),
          time(time),
          replica(replica) {}
    std::uint64_t step;
    double time;
    std::uint64_t replica;
};

/// Too many replicas aborted for the experiment to be trustworthy.
class ExperimentThresholdError : public std::runtime_error {
  public:
    explicit ExperimentThresholdError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mushy
