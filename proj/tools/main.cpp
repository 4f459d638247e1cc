#include <iostream>

#include "hyperflow/cli/cli.hpp"

int main(int argc, char** argv) { return hyperflow::cli::run(argc, argv, std::cout, std::cerr); }
