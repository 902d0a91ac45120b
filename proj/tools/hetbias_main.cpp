#include <iostream>

#include "hetbias/cli.hpp"

int main(int argc, char** argv) { return hetbias::cli::run(argc, argv, std::cout, std::cerr); }
