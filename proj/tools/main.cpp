#include <iostream>

#include "fbmavg/cli.hpp"

int main(int argc, char** argv) { return fbmavg::run_cli(argc, argv, std::cout, std::cerr); }
