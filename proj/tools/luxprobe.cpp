// Copyright 2026 The luxprobe Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>
#include <string>
#include <vector>

#include "luxprobe/cli.h"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return luxprobe::run(args, std::cout, std::cerr);
}
