#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "wqrf/error.hpp"

namespace wqrf::cli {

enum ExitStatus : int {
  kOk = 0,
  kInputError = 2,
  kTrainingError = 3,
  kModelError = 4,
};

ExitStatus exit_status_for(Errc code) noexcept;

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace wqrf::cli
