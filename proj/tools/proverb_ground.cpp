#include <iostream>

#include "proverb/cli.hpp"

int main(int argc, char** argv) { return proverb::cli::run(argc, argv, std::cout, std::cerr); }
