#include <iostream>

#include "gdl/cli.hpp"

int main(int argc, char** argv) { return gdl::run_cli(argc, argv, std::cout, std::cerr); }
