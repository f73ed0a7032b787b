#include <iostream>

#include "priorinfo/cli.hpp"

int main(int argc, char** argv) { return priorinfo::run_cli(argc, argv, std::cout, std::cerr); }
