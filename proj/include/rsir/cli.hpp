#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rsir::cli {

/// Process exit status per error class.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kIo = 3,
    kFormat = 4,
    kDimension = 5,
    kInsufficientData = 6,
    kData = 7,
    kEmptyIndex = 8,
    kEvaluation = 9,
    kConstruction = 10,
    kIndexMissing = 11,
    kValidationFailed = 12,
    kInternal = 70,
};

/// Runs one subcommand. `args` excludes the program name. Results go to
/// `out`; the logged configuration, notes and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

}  // namespace rsir::cli
