#include "propsel/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return propsel::cli::run_cli(argc, argv, std::cout, std::cerr); }
