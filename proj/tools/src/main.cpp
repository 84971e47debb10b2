#include <iostream>

#include "posekit_cli/cli.hpp"

int main(int argc, char** argv) { return posekit::cli::run(argc, argv, std::cout, std::cerr); }
