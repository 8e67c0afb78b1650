#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return tsnn::cli::run(argc, argv, std::cout, std::cerr); }
