#include "bope/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return bope::run_cli(argc, argv, std::cout, std::cerr); }
