#include <iostream>

#include "gparse/cli.hpp"

int main(int argc, char** argv) { return gparse::run_cli(argc, argv, std::cout, std::cerr); }
