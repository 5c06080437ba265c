#include <iostream>

#include "hunklabel/cli.hpp"

int main(int argc, char** argv) { return hunklabel::run_cli(argc, argv, std::cout, std::cerr); }
