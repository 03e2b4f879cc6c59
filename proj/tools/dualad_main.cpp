#include <iostream>

#include "dualad/cli.hpp"

int main(int argc, char** argv) { return dualad::cli_main(argc, argv, std::cout, std::cerr); }
