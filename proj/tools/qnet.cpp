#include <iostream>

#include "qnet/cli.hpp"

int main(int argc, char** argv) { return qnet::run_cli(argc, argv, std::cout, std::cerr); }
