#pragma once

/**
 * @file cli.hpp
 * @brief Command-line front end: analyze, scan, verify, catalog.
 *
 * Exit codes: 0 success, 1 verification failure, 2 usage or input error,
 * 3 mathematical domain error (gap, positivity, order exhaustion).
 */

#include <iosfwd>
#include <string>
#include <vector>

namespace weylscope::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kReportSchema = "weylscope.report/1";
inline constexpr const char* kCatalogSchema = "weylscope.catalog/1";

enum ExitCode : int { Ok = 0, VerifyFailed = 1, InputFailure = 2, DomainFailure = 3 };

/// Runs the CLI on args (without the program name). Reports go to out, or to
/// the --out file; diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace weylscope::cli
