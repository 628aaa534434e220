#pragma once

namespace wuglab {

// Entry point behind the command-line tool; returns the process exit code.
// 0 success, 1 runtime/I-O failure, 2 usage error.
int cli_main(int argc, const char* const* argv);

}  // namespace wuglab
