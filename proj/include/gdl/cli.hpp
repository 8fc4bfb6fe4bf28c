#pragma once

#include <iosfwd>

namespace gdl {

/// Entry point of the command-line tool. Returns the process exit code;
/// failures print a single "error: <Code>: <message>" line to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gdl
