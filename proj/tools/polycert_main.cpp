#include <iostream>

#include "polycert/cli.hpp"

int main(int argc, char** argv) { return polycert::cli::run_cli(argc, argv, std::cout, std::cerr); }
