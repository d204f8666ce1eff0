#include "evograph/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return evograph::cli_main(argc, argv, std::cout, std::cerr, std::cin); }
