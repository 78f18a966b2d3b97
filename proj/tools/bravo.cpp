#include "bravo/cli.hpp"

int main(int argc, char** argv) { return bravo::cli::run(argc, argv); }
