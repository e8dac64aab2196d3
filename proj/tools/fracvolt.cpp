#include <iostream>

#include "fracvolt/cli.hpp"

int main(int argc, char** argv) { return fracvolt::run_cli(argc, argv, std::cout, std::cerr); }
