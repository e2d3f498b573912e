#include <iostream>

#include "smoothgate/cli.hpp"

int main(int argc, char** argv) { return smoothgate::cli::run(argc, argv, std::cout, std::cerr); }
