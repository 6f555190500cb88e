#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prb::cli {

inline constexpr const char* kOutputEnvVar = "PRB_ORACLE_OUT";
inline constexpr const char* kDefaultOutputDir = "prb_out";

// Runs one invocation (args exclude the program name). Returns the exit status;
// failures print a single diagnostic line to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Summary table (model x percentile saving / over / under) of a report.json document.
std::string inspect_summary(const std::string& report_json);

}  // namespace prb::cli
