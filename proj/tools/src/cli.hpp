#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vmmr/domain.hpp"

namespace vmmr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitBackend = 3;

// Runs the `vmmr` command line. Never throws; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// File stem used for per-label description and image files:
// the canonical id with '/' replaced by "__".
std::string label_file_stem(const VehicleLabel& label);

// Queries file: one JSON object per line with "id", either "image" (path,
// relative to the file) or "description", and optionally "make"/"model".
// Image paths must exist. Throws Error(kInvalidInput) or Error(kSchemaError).
std::vector<QueryInput> load_queries(const std::filesystem::path& path);

}  // namespace vmmr::cli
