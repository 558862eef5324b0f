#include <iostream>

#include "cli.h"

int main(int argc, char** argv) { return ewgsl::RunCli(argc, argv, std::cout, std::cerr); }
