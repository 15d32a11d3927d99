#include "pertkit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pertkit::cli::run(argc, argv, std::cout, std::cerr); }
