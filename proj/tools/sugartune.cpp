#include <iostream>

#include "sugar/cli.hpp"

int main(int argc, char** argv) { return sugar::cli::run(argc, argv, std::cout, std::cerr); }
