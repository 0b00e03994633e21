// Copyright 2026 The scorelm Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "scorelm/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scorelm::cli::run_command(args, std::cout, std::cerr);
}
