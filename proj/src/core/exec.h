// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace meshstyle {

// Execution policy for the hot kernels. Every kernel has a plain serial
// implementation (the reference) and an OpenMP variant that parallelizes
// over independent output elements, so both produce identical results
// for a fixed thread count.
enum class Exec {
    Serial,
    Parallel,
};

// Process-wide default used by kernels when no policy is passed explicitly.
// Defaults to Parallel when compiled with OpenMP, Serial otherwise.
Exec default_exec();
void set_default_exec(Exec exec);

bool openmp_enabled();
int max_threads();

}  // namespace meshstyle
