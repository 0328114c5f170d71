#include <iostream>

#include "adloc/cli.hpp"

int main(int argc, char** argv) { return adloc::cli::run(argc, argv, std::cout, std::cerr); }
