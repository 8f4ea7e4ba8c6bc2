#include <iostream>

#include "capguard/cli.hpp"

int main(int argc, char** argv) { return capguard::run_cli(argc, argv, std::cout, std::cerr); }
