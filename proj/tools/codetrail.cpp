#include <iostream>

#include "codetrail/cli/cli.hpp"

int main(int argc, char** argv) { return codetrail::cli::run_cli(argc, argv, std::cout, std::cerr); }
