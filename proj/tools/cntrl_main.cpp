#include "cntrl/cli.hpp"

int main(int argc, char** argv) { return cntrl::run_cli(argc, argv); }
