#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return riesz::cli::dispatch(argc, argv, std::cout, std::cerr); }
