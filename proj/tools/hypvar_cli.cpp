#include <iostream>

#include "hypvar/cli.hpp"

int main(int argc, char** argv) { return hypvar::cli::main_entry(argc, argv, std::cout, std::cerr); }
