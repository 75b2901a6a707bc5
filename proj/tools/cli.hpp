#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ogc/matrix.hpp"

namespace ogc::cli {

/// Runs one command line (argv[0] is the program name). Returns the process
/// exit status: 0 success, 1 a theorem check failed, 2 usage or input error,
/// 3 a training run diverged or failed.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "a..b" (inclusive) and comma-separated integers, freely mixed.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<int> parse_int_list(const std::string& text);

/// Plain comma-separated reals, one row per line, no header.
Matrix read_csv_matrix(const std::filesystem::path& path);
void write_csv_matrix(const std::filesystem::path& path, const Matrix& m);

}  // namespace ogc::cli
