#include <iostream>

#include "icesheet/cli.hpp"

int main(int argc, char** argv) { return icesheet::run_cli(argc, argv, std::cout, std::cerr); }
