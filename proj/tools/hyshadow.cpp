#include <iostream>

#include "hyshadow/cli.hpp"

int main(int argc, char** argv) { return hyshadow::run(argc, argv, std::cout, std::cerr); }
