#pragma once

// The `bhe` command-line front end, as a library so tests can drive it.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace bhe::cli {

enum ExitCode : int { ok = 0, verification_failure = 1, usage_error = 2, io_error = 3 };

/// Runs one invocation; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// key = value lines, or the [config] section of an echoed text report
/// (ending at its first blank line), or the "config" object of a JSON
/// report. Lines starting with '#' are skipped.
/// Throws std::runtime_error on a malformed line.
std::map<std::string, std::string> parse_config(std::istream& in);

/// %.12g, or "nan" / "inf".
std::string format_number(double x);

}  // namespace bhe::cli
