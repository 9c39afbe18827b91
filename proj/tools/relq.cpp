#include "relq/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return relq::cli::run(argc, argv, std::cout, std::cerr); }
