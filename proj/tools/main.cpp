#include <iostream>

#include "elmcsi/cli.hpp"

int main(int argc, char** argv) { return elmcsi::cli_main(argc, argv, std::cout, std::cerr); }
