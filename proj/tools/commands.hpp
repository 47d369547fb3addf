#pragma once

#include <string>
#include <vector>

#include "config.hpp"

namespace mwcli {

inline constexpr const char* kSchema = "mwlab-report/1";

enum ExitCode { kPass = 0, kAssertionFailure = 1, kConfigError = 2, kNumericFailure = 3 };

struct CommandResult {
    json report;  // schema, command, config, results, assertions (timing is added by the caller)
    int exit_code = kPass;
};

const std::vector<std::string>& all_suites();

CommandResult cmd_characteristic(const ExperimentConfig& cfg);
CommandResult cmd_reduce(const ExperimentConfig& cfg);
// Empty suites: the config's "suites" list, or every suite.
CommandResult cmd_verify(const ExperimentConfig& cfg, std::vector<std::string> suites = {});
CommandResult cmd_report(const std::vector<json>& inputs, const std::vector<std::string>& names);

// Flat projection: one header-led section per table, sections separated by a blank line.
std::string to_csv(const json& report);

}  // namespace mwcli
