#include <iostream>

#include "ricsec/cli.hpp"

int main(int argc, char** argv) { return ricsec::run_cli(argc, argv, std::cout, std::cerr); }
