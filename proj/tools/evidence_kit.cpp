#include "evidence_kit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return evidence_kit::cli::run(argc, argv, std::cout, std::cerr); }
