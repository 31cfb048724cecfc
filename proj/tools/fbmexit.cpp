#include <iostream>

#include "fbmexit/cli.hpp"

int main(int argc, char** argv) { return fbmexit::cli::main_entry(argc, argv, std::cout, std::cerr); }
