#include <iostream>

#include "dropshape/cli.hpp"

int main(int argc, char** argv) { return dropshape::run_cli(argc, argv, std::cout, std::cerr); }
