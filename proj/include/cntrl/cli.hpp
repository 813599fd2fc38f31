#pragma once

namespace cntrl {

// Exit codes: 0 ok, 1 usage, 2 bad input data, 3 backend failure.
int run_cli(int argc, char** argv);

}  // namespace cntrl
