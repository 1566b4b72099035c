// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli/cli.h"

int main(int argc, char** argv) {
    return meshstyle::run_cli(argc, argv);
}
