// scenario.hpp: batch scenario files and the run orchestration behind the
// `simulate` tool.
//
// Config format: one `key = value` per line, '#' starts a comment, unknown
// keys are errors. See README.md for the key table and defaults.

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hhgq/farfield.hpp"
#include "hhgq/model.hpp"

namespace hhgq {

enum class RunMode { hierarchy, oracle, compare, farfield };

std::string to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

struct Scenario {
    SystemConfig system{};
    RunMode run{RunMode::hierarchy};
    std::string out_dir{"out"};
    bool appendix_literal{false};
    SecondMomentMode e2_mode{SecondMomentMode::OperatorConsistent};
    bool semiclassical_only{false};
    bool emean_mode_sum{true};
    std::size_t fock_cutoff{12};

    bool operator==(const Scenario&) const = default;
};

/// Throws ConfigError with "<source>:<line>: ..." messages.
Scenario parse_config_text(std::string_view text, const std::string& source = "<config>");
Scenario parse_config(const std::filesystem::path& path);

/// Cross-key invariants, including the oracle dimension guard.
void validate(const Scenario& scenario);

/// Every key with its resolved value; parses back to an equal Scenario.
std::string render_config(const Scenario& scenario);

/// The documented key names, in render order.
const std::vector<std::string>& config_keys();

struct RunResult {
    int exit_code{0};
    std::vector<std::filesystem::path> files;
    std::string message;
};

/// Writes the CSV outputs into scenario.out_dir. Divergence yields a nonzero
/// exit code and partial files ending in a "# TRUNCATED" line.
RunResult run(const Scenario& scenario);

/// "%.17g" with '.' decimal separator.
std::string format_double(double value);

}  // namespace hhgq
