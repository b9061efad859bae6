#include <iostream>

#include "sepnmf/cli/commands.hpp"

int main(int argc, char** argv) { return sepnmf::cli::run(argc, argv, std::cout, std::cerr); }
