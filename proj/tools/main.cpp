#include <iostream>

#include "crpower/cli.hpp"

int main(int argc, char** argv) { return crpower::run_cli(argc, argv, std::cout, std::cerr); }
