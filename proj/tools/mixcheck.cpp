#include <iostream>

#include "mixcheck/cli.hpp"

int main(int argc, char** argv) { return mixcheck::run(argc, argv, std::cin, std::cout, std::cerr); }
