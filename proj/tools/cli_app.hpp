#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ginprod::cli {

// Parses command-line arguments (program name excluded), runs the selected
// command and writes results to `out` (or the --out path) and error records
// to `err`. Returns the process exit code: 0 success, 1 verification
// failure, 2 configuration error, 3 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace ginprod::cli
