#pragma once

namespace convodyn {

// Entry point of the command-line driver. Returns the process exit status:
// zero on success, 1 for bad input, 2 when a file or the scorer endpoint fails.
int run_cli(int argc, char** argv);

}  // namespace convodyn
