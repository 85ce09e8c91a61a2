// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "inform/cli/commands.hpp"

int main(int argc, char** argv) { return inform::cli::run_cli(argc, argv, std::cout, std::cerr); }
