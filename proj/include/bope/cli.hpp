#pragma once

#include "bope/coords.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace bope {

// exit codes
inline constexpr int exit_pass = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_input_error = 2;

// argv[0] is the program name
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// JSON with every float printed to 17 significant digits
std::string dump_json(const nlohmann::json& j, int indent = 2);

// "1.5", "-2i", "0.3+0.2i", "1e-3-4e-2i"
cplx parse_complex(const std::string& text);
// comma or whitespace separated
std::vector<cplx> parse_point(const std::string& text);

} // namespace bope
