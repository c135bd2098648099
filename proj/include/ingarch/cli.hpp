#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ingarch::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
    kOk = 0,
    kBadConfig = 2,
    kDomainError = 3,
    kSingular = 4,
    kIoError = 5,
};

/// Dispatch one invocation. args excludes the program name. Normal output
/// goes to out, diagnostics to err; the return value is the process exit
/// status (ExitCode values distinguish the failure classes).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace ingarch::cli
