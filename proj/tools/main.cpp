#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return green_ssl::cli::run(argc, argv, std::cout, std::cerr); }
