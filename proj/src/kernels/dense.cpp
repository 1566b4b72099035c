// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "kernels/dense.h"

#include <cstddef>

namespace meshstyle::kernels {

namespace {

inline void linear_forward_row(const double* x, const double* w, const double* b, double* y,
                               int in, int out) {
    if (b) {
        for (int k = 0; k < out; ++k) y[k] = b[k];
    } else {
        for (int k = 0; k < out; ++k) y[k] = 0.0;
    }
    for (int j = 0; j < in; ++j) {
        const double xj = x[j];
        const double* wj = w + static_cast<std::size_t>(j) * out;
        for (int k = 0; k < out; ++k) y[k] += xj * wj[k];
    }
}

inline void backward_input_row(const double* dy, const double* w, double* dx, int in, int out) {
    for (int j = 0; j < in; ++j) {
        const double* wj = w + static_cast<std::size_t>(j) * out;
        double acc = 0.0;
        for (int k = 0; k < out; ++k) acc += dy[k] * wj[k];
        dx[j] = acc;
    }
}

// One row of dW: dW[j, :] += sum_i X[i, j] * dY[i, :].
inline void backward_weight_row(const double* x, const double* dy, double* dwj, int n, int in,
                                int out, int j) {
    for (int i = 0; i < n; ++i) {
        const double xij = x[static_cast<std::size_t>(i) * in + j];
        const double* dyi = dy + static_cast<std::size_t>(i) * out;
        for (int k = 0; k < out; ++k) dwj[k] += xij * dyi[k];
    }
}

}  // namespace

void linear_forward(const double* x, const double* w, const double* b, double* y, int n, int in,
                    int out, Exec exec) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            linear_forward_row(x + static_cast<std::size_t>(i) * in, w, b,
                               y + static_cast<std::size_t>(i) * out, in, out);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            linear_forward_row(x + static_cast<std::size_t>(i) * in, w, b,
                               y + static_cast<std::size_t>(i) * out, in, out);
        }
    }
}

void linear_backward_input(const double* dy, const double* w, double* dx, int n, int in, int out,
                           Exec exec) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            backward_input_row(dy + static_cast<std::size_t>(i) * out, w,
                               dx + static_cast<std::size_t>(i) * in, in, out);
        }
    } else {
        for (int i = 0; i < n; ++i) {
            backward_input_row(dy + static_cast<std::size_t>(i) * out, w,
                               dx + static_cast<std::size_t>(i) * in, in, out);
        }
    }
}

void linear_backward_params(const double* x, const double* dy, double* dw, double* db, int n,
                            int in, int out, Exec exec) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < in; ++j) {
            backward_weight_row(x, dy, dw + static_cast<std::size_t>(j) * out, n, in, out, j);
        }
    } else {
        for (int j = 0; j < in; ++j) {
            backward_weight_row(x, dy, dw + static_cast<std::size_t>(j) * out, n, in, out, j);
        }
    }
    if (db) {
        // Column sums, accumulated in row order; single pass, not worth a
        // parallel variant next to the O(n*in*out) weight update.
        for (int i = 0; i < n; ++i) {
            const double* dyi = dy + static_cast<std::size_t>(i) * out;
            for (int k = 0; k < out; ++k) db[k] += dyi[k];
        }
    }
}

void relu_forward(const double* x, double* y, long long n, Exec exec) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    } else {
        for (long long i = 0; i < n; ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    }
}

void relu_backward(const double* x, const double* dy, double* dx, long long n, Exec exec) {
    if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
    } else {
        for (long long i = 0; i < n; ++i) dx[i] = x[i] > 0.0 ? dy[i] : 0.0;
    }
}

}  // namespace meshstyle::kernels
