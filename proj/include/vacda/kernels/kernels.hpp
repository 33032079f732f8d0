#pragma once

#include <cstddef>

#include "vacda/core/parallel.hpp"

// Dense 1-D conv / transposed-conv / linear kernels plus their backward
// passes, each in two variants:
//
//   serial::  — reference implementation, straight nested loops, kept for
//               testing and as the ground truth for the OpenMP variants;
//   omp::     — OpenMP implementation that distributes *independent output
//               elements* over threads.  The per-element summation order is
//               identical to the serial code, so both variants produce
//               bit-identical results for any thread count.
//
// The unqualified functions dispatch on kernels::parallel_enabled().
//
// Conventions: row-major storage; activations x/y indexed [batch][channel][t],
// linear inputs [batch][feature]; conv weights w[co][ci][k]; transposed-conv
// weights w[ci][co][k].  Data gradients (dx) are overwritten, parameter
// gradients (dw, db) are accumulated so multi-view backward passes can reuse
// one buffer.

namespace vacda::kernels {

constexpr long long kParGrain = 2048;  // below this many outputs, stay serial

namespace serial {

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                    int Li, int Co, int K, int stride, int pad, int Lo) {
    for (int b = 0; b < B; ++b)
        for (int co = 0; co < Co; ++co)
            for (int t = 0; t < Lo; ++t) {
                T acc = bias[co];
                for (int ci = 0; ci < Ci; ++ci)
                    for (int k = 0; k < K; ++k) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Li) continue;
                        acc += w[(static_cast<std::size_t>(co) * Ci + ci) * K + k] *
                               x[(static_cast<std::size_t>(b) * Ci + ci) * Li + u];
                    }
                y[(static_cast<std::size_t>(b) * Co + co) * Lo + t] = acc;
            }
}

template <typename T>
void conv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                          int Co, int K, int stride, int pad, int Lo) {
    for (int b = 0; b < B; ++b)
        for (int ci = 0; ci < Ci; ++ci)
            for (int u = 0; u < Li; ++u) {
                T acc = T{};
                for (int co = 0; co < Co; ++co)
                    for (int k = 0; k < K; ++k) {
                        int num = u + pad - k;
                        if (num < 0 || num % stride != 0) continue;
                        int t = num / stride;
                        if (t >= Lo) continue;
                        acc += w[(static_cast<std::size_t>(co) * Ci + ci) * K + k] *
                               dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t];
                    }
                dx[(static_cast<std::size_t>(b) * Ci + ci) * Li + u] = acc;
            }
}

template <typename T>
void conv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                            int Li, int Co, int K, int stride, int pad, int Lo) {
    for (int co = 0; co < Co; ++co)
        for (int ci = 0; ci < Ci; ++ci)
            for (int k = 0; k < K; ++k) {
                T acc = T{};
                for (int b = 0; b < B; ++b)
                    for (int t = 0; t < Lo; ++t) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Li) continue;
                        acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t] *
                               x[(static_cast<std::size_t>(b) * Ci + ci) * Li + u];
                    }
                dw[(static_cast<std::size_t>(co) * Ci + ci) * K + k] += acc;
            }
    for (int co = 0; co < Co; ++co) {
        T acc = T{};
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < Lo; ++t)
                acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t];
        db[co] += acc;
    }
}

template <typename T>
void tconv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                     int Li, int Co, int K, int stride, int pad, int Lo) {
    for (int b = 0; b < B; ++b)
        for (int co = 0; co < Co; ++co)
            for (int u = 0; u < Lo; ++u) {
                T acc = bias[co];
                for (int ci = 0; ci < Ci; ++ci)
                    for (int t = 0; t < Li; ++t) {
                        int k = u + pad - t * stride;
                        if (k < 0 || k >= K) continue;
                        acc += x[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] *
                               w[(static_cast<std::size_t>(ci) * Co + co) * K + k];
                    }
                y[(static_cast<std::size_t>(b) * Co + co) * Lo + u] = acc;
            }
}

template <typename T>
void tconv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                           int Co, int K, int stride, int pad, int Lo) {
    for (int b = 0; b < B; ++b)
        for (int ci = 0; ci < Ci; ++ci)
            for (int t = 0; t < Li; ++t) {
                T acc = T{};
                for (int co = 0; co < Co; ++co)
                    for (int k = 0; k < K; ++k) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Lo) continue;
                        acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u] *
                               w[(static_cast<std::size_t>(ci) * Co + co) * K + k];
                    }
                dx[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] = acc;
            }
}

template <typename T>
void tconv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                             int Li, int Co, int K, int stride, int pad, int Lo) {
    for (int ci = 0; ci < Ci; ++ci)
        for (int co = 0; co < Co; ++co)
            for (int k = 0; k < K; ++k) {
                T acc = T{};
                for (int b = 0; b < B; ++b)
                    for (int t = 0; t < Li; ++t) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Lo) continue;
                        acc += x[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] *
                               dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u];
                    }
                dw[(static_cast<std::size_t>(ci) * Co + co) * K + k] += acc;
            }
    for (int co = 0; co < Co; ++co) {
        T acc = T{};
        for (int b = 0; b < B; ++b)
            for (int u = 0; u < Lo; ++u)
                acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u];
        db[co] += acc;
    }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int B, int In,
                    int Out) {
    for (int b = 0; b < B; ++b)
        for (int o = 0; o < Out; ++o) {
            T acc = bias[o];
            for (int i = 0; i < In; ++i)
                acc += w[static_cast<std::size_t>(o) * In + i] *
                       x[static_cast<std::size_t>(b) * In + i];
            y[static_cast<std::size_t>(b) * Out + o] = acc;
        }
}

template <typename T>
void linear_backward_data(const T* dy, const T* w, T* dx, int B, int In, int Out) {
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < In; ++i) {
            T acc = T{};
            for (int o = 0; o < Out; ++o)
                acc += w[static_cast<std::size_t>(o) * In + i] *
                       dy[static_cast<std::size_t>(b) * Out + o];
            dx[static_cast<std::size_t>(b) * In + i] = acc;
        }
}

template <typename T>
void linear_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int In,
                            int Out) {
    for (int o = 0; o < Out; ++o)
        for (int i = 0; i < In; ++i) {
            T acc = T{};
            for (int b = 0; b < B; ++b)
                acc += dy[static_cast<std::size_t>(b) * Out + o] *
                       x[static_cast<std::size_t>(b) * In + i];
            dw[static_cast<std::size_t>(o) * In + i] += acc;
        }
    for (int o = 0; o < Out; ++o) {
        T acc = T{};
        for (int b = 0; b < B; ++b) acc += dy[static_cast<std::size_t>(b) * Out + o];
        db[o] += acc;
    }
}

template <typename T>
void relu_forward(const T* x, T* y, long long n) {
    for (long long i = 0; i < n; ++i) y[i] = x[i] > T{} ? x[i] : T{};
}

template <typename T>
void relu_backward(const T* dy, const T* y, T* dx, long long n) {
    for (long long i = 0; i < n; ++i) dx[i] = y[i] > T{} ? dy[i] : T{};
}

// S[i][j] = <R_i, R_j> for rows of R[N x D].
template <typename T>
void gram(const T* r, T* s, int N, int D) {
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            T acc = T{};
            for (int d = 0; d < D; ++d)
                acc += r[static_cast<std::size_t>(i) * D + d] *
                       r[static_cast<std::size_t>(j) * D + d];
            s[static_cast<std::size_t>(i) * N + j] = acc;
        }
}

// dR[i] = sum_j (dS[i][j] + dS[j][i]) R_j
template <typename T>
void gram_backward(const T* ds, const T* r, T* dr, int N, int D) {
    for (int i = 0; i < N; ++i)
        for (int d = 0; d < D; ++d) {
            T acc = T{};
            for (int j = 0; j < N; ++j)
                acc += (ds[static_cast<std::size_t>(i) * N + j] +
                        ds[static_cast<std::size_t>(j) * N + i]) *
                       r[static_cast<std::size_t>(j) * D + d];
            dr[static_cast<std::size_t>(i) * D + d] = acc;
        }
}

}  // namespace serial

namespace omp {

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                    int Li, int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * B * Co * Lo;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int co = 0; co < Co; ++co) {
            const T* xb = x + static_cast<std::size_t>(b) * Ci * Li;
            const T* wc = w + static_cast<std::size_t>(co) * Ci * K;
            T* yrow = y + (static_cast<std::size_t>(b) * Co + co) * Lo;
            for (int t = 0; t < Lo; ++t) {
                T acc = bias[co];
                for (int ci = 0; ci < Ci; ++ci)
                    for (int k = 0; k < K; ++k) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Li) continue;
                        acc += wc[static_cast<std::size_t>(ci) * K + k] *
                               xb[static_cast<std::size_t>(ci) * Li + u];
                    }
                yrow[t] = acc;
            }
        }
}

template <typename T>
void conv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                          int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * B * Ci * Li;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int ci = 0; ci < Ci; ++ci)
            for (int u = 0; u < Li; ++u) {
                T acc = T{};
                for (int co = 0; co < Co; ++co)
                    for (int k = 0; k < K; ++k) {
                        int num = u + pad - k;
                        if (num < 0 || num % stride != 0) continue;
                        int t = num / stride;
                        if (t >= Lo) continue;
                        acc += w[(static_cast<std::size_t>(co) * Ci + ci) * K + k] *
                               dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t];
                    }
                dx[(static_cast<std::size_t>(b) * Ci + ci) * Li + u] = acc;
            }
}

template <typename T>
void conv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                            int Li, int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * Co * Ci * K;
#pragma omp parallel for collapse(3) schedule(static) if (work > 64)
    for (int co = 0; co < Co; ++co)
        for (int ci = 0; ci < Ci; ++ci)
            for (int k = 0; k < K; ++k) {
                T acc = T{};
                for (int b = 0; b < B; ++b)
                    for (int t = 0; t < Lo; ++t) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Li) continue;
                        acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t] *
                               x[(static_cast<std::size_t>(b) * Ci + ci) * Li + u];
                    }
                dw[(static_cast<std::size_t>(co) * Ci + ci) * K + k] += acc;
            }
#pragma omp parallel for schedule(static) if (Co > 8)
    for (int co = 0; co < Co; ++co) {
        T acc = T{};
        for (int b = 0; b < B; ++b)
            for (int t = 0; t < Lo; ++t)
                acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + t];
        db[co] += acc;
    }
}

template <typename T>
void tconv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                     int Li, int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * B * Co * Lo;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int co = 0; co < Co; ++co)
            for (int u = 0; u < Lo; ++u) {
                T acc = bias[co];
                for (int ci = 0; ci < Ci; ++ci)
                    for (int t = 0; t < Li; ++t) {
                        int k = u + pad - t * stride;
                        if (k < 0 || k >= K) continue;
                        acc += x[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] *
                               w[(static_cast<std::size_t>(ci) * Co + co) * K + k];
                    }
                y[(static_cast<std::size_t>(b) * Co + co) * Lo + u] = acc;
            }
}

template <typename T>
void tconv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                           int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * B * Ci * Li;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int ci = 0; ci < Ci; ++ci)
            for (int t = 0; t < Li; ++t) {
                T acc = T{};
                for (int co = 0; co < Co; ++co)
                    for (int k = 0; k < K; ++k) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Lo) continue;
                        acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u] *
                               w[(static_cast<std::size_t>(ci) * Co + co) * K + k];
                    }
                dx[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] = acc;
            }
}

template <typename T>
void tconv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                             int Li, int Co, int K, int stride, int pad, int Lo) {
    const long long work = 1LL * Ci * Co * K;
#pragma omp parallel for collapse(3) schedule(static) if (work > 64)
    for (int ci = 0; ci < Ci; ++ci)
        for (int co = 0; co < Co; ++co)
            for (int k = 0; k < K; ++k) {
                T acc = T{};
                for (int b = 0; b < B; ++b)
                    for (int t = 0; t < Li; ++t) {
                        int u = t * stride + k - pad;
                        if (u < 0 || u >= Lo) continue;
                        acc += x[(static_cast<std::size_t>(b) * Ci + ci) * Li + t] *
                               dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u];
                    }
                dw[(static_cast<std::size_t>(ci) * Co + co) * K + k] += acc;
            }
#pragma omp parallel for schedule(static) if (Co > 8)
    for (int co = 0; co < Co; ++co) {
        T acc = T{};
        for (int b = 0; b < B; ++b)
            for (int u = 0; u < Lo; ++u)
                acc += dy[(static_cast<std::size_t>(b) * Co + co) * Lo + u];
        db[co] += acc;
    }
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int B, int In,
                    int Out) {
    const long long work = 1LL * B * Out;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int o = 0; o < Out; ++o) {
            T acc = bias[o];
            const T* xb = x + static_cast<std::size_t>(b) * In;
            const T* wo = w + static_cast<std::size_t>(o) * In;
            for (int i = 0; i < In; ++i) acc += wo[i] * xb[i];
            y[static_cast<std::size_t>(b) * Out + o] = acc;
        }
}

template <typename T>
void linear_backward_data(const T* dy, const T* w, T* dx, int B, int In, int Out) {
    const long long work = 1LL * B * In;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int b = 0; b < B; ++b)
        for (int i = 0; i < In; ++i) {
            T acc = T{};
            for (int o = 0; o < Out; ++o)
                acc += w[static_cast<std::size_t>(o) * In + i] *
                       dy[static_cast<std::size_t>(b) * Out + o];
            dx[static_cast<std::size_t>(b) * In + i] = acc;
        }
}

template <typename T>
void linear_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int In,
                            int Out) {
    const long long work = 1LL * Out * In;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int o = 0; o < Out; ++o)
        for (int i = 0; i < In; ++i) {
            T acc = T{};
            for (int b = 0; b < B; ++b)
                acc += dy[static_cast<std::size_t>(b) * Out + o] *
                       x[static_cast<std::size_t>(b) * In + i];
            dw[static_cast<std::size_t>(o) * In + i] += acc;
        }
#pragma omp parallel for schedule(static) if (Out > 64)
    for (int o = 0; o < Out; ++o) {
        T acc = T{};
        for (int b = 0; b < B; ++b) acc += dy[static_cast<std::size_t>(b) * Out + o];
        db[o] += acc;
    }
}

template <typename T>
void relu_forward(const T* x, T* y, long long n) {
#pragma omp parallel for schedule(static) if (n > kParGrain)
    for (long long i = 0; i < n; ++i) y[i] = x[i] > T{} ? x[i] : T{};
}

template <typename T>
void relu_backward(const T* dy, const T* y, T* dx, long long n) {
#pragma omp parallel for schedule(static) if (n > kParGrain)
    for (long long i = 0; i < n; ++i) dx[i] = y[i] > T{} ? dy[i] : T{};
}

template <typename T>
void gram(const T* r, T* s, int N, int D) {
    const long long work = 1LL * N * N;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) {
            T acc = T{};
            const T* ri = r + static_cast<std::size_t>(i) * D;
            const T* rj = r + static_cast<std::size_t>(j) * D;
            for (int d = 0; d < D; ++d) acc += ri[d] * rj[d];
            s[static_cast<std::size_t>(i) * N + j] = acc;
        }
}

template <typename T>
void gram_backward(const T* ds, const T* r, T* dr, int N, int D) {
    const long long work = 1LL * N * D;
#pragma omp parallel for collapse(2) schedule(static) if (work > kParGrain)
    for (int i = 0; i < N; ++i)
        for (int d = 0; d < D; ++d) {
            T acc = T{};
            for (int j = 0; j < N; ++j)
                acc += (ds[static_cast<std::size_t>(i) * N + j] +
                        ds[static_cast<std::size_t>(j) * N + i]) *
                       r[static_cast<std::size_t>(j) * D + d];
            dr[static_cast<std::size_t>(i) * D + d] = acc;
        }
}

}  // namespace omp

// ---- dispatchers ----------------------------------------------------------

#define VACDA_DISPATCH(fn, ...)        \
    do {                               \
        if (parallel_enabled())        \
            omp::fn(__VA_ARGS__);      \
        else                           \
            serial::fn(__VA_ARGS__);   \
    } while (0)

template <typename T>
void conv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                    int Li, int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(conv1d_forward, x, w, bias, y, B, Ci, Li, Co, K, stride, pad, Lo);
}

template <typename T>
void conv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                          int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(conv1d_backward_data, dy, w, dx, B, Ci, Li, Co, K, stride, pad, Lo);
}

template <typename T>
void conv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                            int Li, int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(conv1d_backward_filter, dy, x, dw, db, B, Ci, Li, Co, K, stride,
                   pad, Lo);
}

template <typename T>
void tconv1d_forward(const T* x, const T* w, const T* bias, T* y, int B, int Ci,
                     int Li, int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(tconv1d_forward, x, w, bias, y, B, Ci, Li, Co, K, stride, pad, Lo);
}

template <typename T>
void tconv1d_backward_data(const T* dy, const T* w, T* dx, int B, int Ci, int Li,
                           int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(tconv1d_backward_data, dy, w, dx, B, Ci, Li, Co, K, stride, pad, Lo);
}

template <typename T>
void tconv1d_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int Ci,
                             int Li, int Co, int K, int stride, int pad, int Lo) {
    VACDA_DISPATCH(tconv1d_backward_filter, dy, x, dw, db, B, Ci, Li, Co, K, stride,
                   pad, Lo);
}

template <typename T>
void linear_forward(const T* x, const T* w, const T* bias, T* y, int B, int In,
                    int Out) {
    VACDA_DISPATCH(linear_forward, x, w, bias, y, B, In, Out);
}

template <typename T>
void linear_backward_data(const T* dy, const T* w, T* dx, int B, int In, int Out) {
    VACDA_DISPATCH(linear_backward_data, dy, w, dx, B, In, Out);
}

template <typename T>
void linear_backward_filter(const T* dy, const T* x, T* dw, T* db, int B, int In,
                            int Out) {
    VACDA_DISPATCH(linear_backward_filter, dy, x, dw, db, B, In, Out);
}

template <typename T>
void relu_forward(const T* x, T* y, long long n) {
    VACDA_DISPATCH(relu_forward, x, y, n);
}

template <typename T>
void relu_backward(const T* dy, const T* y, T* dx, long long n) {
    VACDA_DISPATCH(relu_backward, dy, y, dx, n);
}

template <typename T>
void gram(const T* r, T* s, int N, int D) {
    VACDA_DISPATCH(gram, r, s, N, D);
}

template <typename T>
void gram_backward(const T* ds, const T* r, T* dr, int N, int D) {
    VACDA_DISPATCH(gram_backward, ds, r, dr, N, D);
}

#undef VACDA_DISPATCH

}  // namespace vacda::kernels
