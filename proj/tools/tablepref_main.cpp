// Copyright (C) 2026 tablepref contributors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "tablepref/cli.hpp"

int main(int argc, char** argv) {
    return tablepref::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
