#include <iostream>

#include "divmkt/cli.hpp"

int main(int argc, char** argv) { return divmkt::run_cli(argc, argv, std::cout, std::cerr); }
