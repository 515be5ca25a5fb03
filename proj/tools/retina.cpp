#include <iostream>

#include "retina/cli.h"

int main(int argc, char** argv) { return retina::cli::run(argc, argv, std::cout, std::cerr); }
