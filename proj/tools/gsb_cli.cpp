#include <iostream>

#include "gsb/cli.hpp"

int main(int argc, char** argv) { return gsb::cli::run(argc, argv, std::cout, std::cerr); }
