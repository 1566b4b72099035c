// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/exec.h"

#include <atomic>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace meshstyle {

namespace {

std::atomic<Exec>& exec_state() {
#ifdef _OPENMP
    static std::atomic<Exec> state{Exec::Parallel};
#else
    static std::atomic<Exec> state{Exec::Serial};
#endif
    return state;
}

}  // namespace

Exec default_exec() { return exec_state().load(std::memory_order_relaxed); }

void set_default_exec(Exec exec) { exec_state().store(exec, std::memory_order_relaxed); }

bool openmp_enabled() {
#ifdef _OPENMP
    return true;
#else
    return false;
#endif
}

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace meshstyle
