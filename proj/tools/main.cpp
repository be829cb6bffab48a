#include <iostream>

#include "ancheck/cli.hpp"

int main(int argc, char** argv) { return ancheck::run_main(argc, argv, std::cout, std::cerr); }
