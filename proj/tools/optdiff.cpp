#include <iostream>

#include "optdiff/commands.hpp"

int main(int argc, char** argv) { return optdiff::cli::run(argc, argv, std::cout, std::cerr); }
