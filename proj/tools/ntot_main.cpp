#include <iostream>

#include "ntot/cli.hpp"

int main(int argc, char** argv) { return ntot::run_cli(argc, argv, std::cout, std::cerr); }
