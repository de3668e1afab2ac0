#include "polysamp/cli.hpp"

int main(int argc, char** argv) { return polysamp::cli::cli_main(argc, argv); }
