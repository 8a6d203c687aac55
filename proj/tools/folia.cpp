#include <iostream>

#include "folia/commands.hpp"

int main(int argc, char** argv) { return folia::run_cli(argc, argv, std::cout, std::cerr); }
