// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "core/exec.h"

namespace meshstyle::kernels {

// Dense layer math on row-major buffers. Each kernel parallelizes over
// independent output rows, so Serial and Parallel produce bit-identical
// results (the per-element reduction order never changes).

// Y[n x out] = X[n x in] * W[in x out]; optional bias b[out] added per row.
void linear_forward(const double* x, const double* w, const double* b, double* y, int n, int in,
                    int out, Exec exec);

// dX[n x in] = dY[n x out] * W^T.
void linear_backward_input(const double* dy, const double* w, double* dx, int n, int in, int out,
                           Exec exec);

// dW[in x out] += X^T * dY;  db[out] += column sums of dY (db may be null).
void linear_backward_params(const double* x, const double* dy, double* dw, double* db, int n,
                            int in, int out, Exec exec);

// y = max(x, 0), elementwise over n values.
void relu_forward(const double* x, double* y, long long n, Exec exec);

// dx = dy where x > 0 else 0.
void relu_backward(const double* x, const double* dy, double* dx, long long n, Exec exec);

}  // namespace meshstyle::kernels
