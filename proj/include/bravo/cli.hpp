#pragma once

namespace bravo::cli {

// Exit codes: 0 success, 1 verification failure, 2 bad input, 3 I/O failure.
int run(int argc, char** argv);

}  // namespace bravo::cli
