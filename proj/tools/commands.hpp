#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lorhol::cli {

// Runs one command line (without the program name). Returns the process exit code:
// 0 when every verdict passes, 1 when a verdict fails, 2 for usage, input or domain errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// FNV-1a, 64 bit.
std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

}  // namespace lorhol::cli
