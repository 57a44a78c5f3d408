#include <iostream>

#include "lasertune/cli.hpp"

int main(int argc, char** argv) { return lasertune::run_cli(argc, argv, std::cout, std::cerr); }
