#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcert/config.hpp"

namespace rcert {

inline constexpr const char* kReportSchema = "rcert/report/1";

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitNotVerified = 2 };

struct Outcome {
    int exit_status = kExitOk;
    nlohmann::ordered_json report;
    /// One line per certificate.
    std::vector<std::string> summary;
};

/// Runs one command (certify, integrate, classify, sweep, emden, vdp) and
/// writes report.json plus any CSVs into `out`.
Outcome execute(const std::string& command, const std::optional<std::string>& theorem,
                const RunConfig& config, const std::filesystem::path& out);

/// rcert <command> [theorem] --config <file> --out <dir> [--horizon T] [--tol x]
int run(int argc, const char* const* argv);

}  // namespace rcert
