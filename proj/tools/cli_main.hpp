#ifndef XBAR_CLI_MAIN_HPP
#define XBAR_CLI_MAIN_HPP

#include <string>

namespace xbar {

// Full command-line front end; returns the process exit code.
// Exit codes: 0 success, 1 configuration/usage error, 2 contract violation.
int cli_main(int argc, const char* const* argv);

// RFC 4180 field framing (exposed for tests).
std::string csv_escape(const std::string& field);

}  // namespace xbar

#endif
