#pragma once

// Command-line front end. `run` is the whole program minus process setup, so
// tests and the replay subcommand can drive it in-process.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ims::cli {

enum ExitCode : int { kOk = 0, kNegative = 1, kUsage = 2 };

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a, used for model and output fingerprints in run manifests.
std::uint64_t fnv1a(std::string_view bytes);

std::string hex64(std::uint64_t v);

}  // namespace ims::cli
