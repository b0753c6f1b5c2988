#include <iostream>

#include "copypaste/cli.hpp"

int main(int argc, char** argv) { return copypaste::run_cli(argc, argv, std::cout, std::cerr); }
