#include <iostream>

#include "mindisp/cli.hpp"

int main(int argc, char** argv) { return mindisp::run_cli(argc, argv, std::cout, std::cerr); }
