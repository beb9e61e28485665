#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "surfspec/error.hpp"

namespace surfspec::cli {

/// 0 ok, 1 computation error, 2 io/parse/usage error.
int exit_code_for(ErrorCategory category);

/// Runs one command line (args[0] is the program name) and returns the exit
/// code. Errors go to `err`, as JSON when --json-errors is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Markdown reference of every command and flag.
std::string reference();

}  // namespace surfspec::cli
