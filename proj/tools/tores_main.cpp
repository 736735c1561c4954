#include "tores/cli.hpp"

int main(int argc, char** argv) { return tores::cli::cli_main(argc, argv); }
