#include "csc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return csc::run_cli(argc, argv, std::cout, std::cerr); }
