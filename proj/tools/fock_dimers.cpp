#include <iostream>

#include "fock/cli.hpp"

int main(int argc, char** argv) { return fock::run_cli(argc, argv, std::cout, std::cerr); }
