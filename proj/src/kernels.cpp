#include "gsos/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <type_traits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsos::kernels {

namespace {
std::atomic<bool> g_parallel{true};

// Work below this size is not worth forking threads for.
constexpr long long kParallelCutoff = 1 << 15;
}  // namespace

void set_parallel(bool on) { g_parallel.store(on); }
bool parallel_enabled() {
#ifdef _OPENMP
    return g_parallel.load();
#else
    return false;
#endif
}

int thread_count() {
#ifdef _OPENMP
    return parallel_enabled() ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

namespace {

template <typename T>
inline T op_elem(const T* M, int ld, int i, int j, char op) {
    if (op == 'N') return M[static_cast<std::size_t>(i) * ld + j];
    const T v = M[static_cast<std::size_t>(j) * ld + i];
    if constexpr (std::is_same_v<T, cd>)
        return op == 'C' ? std::conj(v) : v;
    else
        return v;
}

template <typename T>
void gemm_rows(const T* A, int lda, const T* B, int ldb, T* C, int ldc, int m, int k, int n,
               char opA, char opB, bool acc, int i0, int i1) {
    for (int i = i0; i < i1; ++i) {
        T* crow = C + static_cast<std::size_t>(i) * ldc;
        if (!acc) std::fill(crow, crow + n, T(0));
        for (int l = 0; l < k; ++l) {
            const T a = op_elem(A, lda, i, l, opA);
            if (a == T(0)) continue;
            if (opB == 'N') {
                const T* brow = B + static_cast<std::size_t>(l) * ldb;
                for (int j = 0; j < n; ++j) crow[j] += a * brow[j];
            } else {
                for (int j = 0; j < n; ++j) crow[j] += a * op_elem(B, ldb, l, j, opB);
            }
        }
    }
}

template <typename T>
void gemm_impl(const T* A, int lda, const T* B, int ldb, T* C, int ldc, int m, int k, int n,
               char opA, char opB, bool acc, bool par) {
    const long long work = 1ll * m * k * n;
#ifdef _OPENMP
    if (par && work >= kParallelCutoff && m > 1) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < m; ++i) gemm_rows(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, i, i + 1);
        return;
    }
#endif
    (void)work;
    (void)par;
    gemm_rows(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, 0, m);
}

}  // namespace

void gemm(const cd* A, int lda, const cd* B, int ldb, cd* C, int ldc, int m, int k, int n,
          char opA, char opB, bool acc) {
    gemm_impl(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, parallel_enabled());
}

void gemm_serial(const cd* A, int lda, const cd* B, int ldb, cd* C, int ldc, int m, int k, int n,
                 char opA, char opB, bool acc) {
    gemm_impl(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, false);
}

void gemm_real(const double* A, int lda, const double* B, int ldb, double* C, int ldc, int m,
               int k, int n, char opA, char opB, bool acc) {
    gemm_impl(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, parallel_enabled());
}

void gemm_real_serial(const double* A, int lda, const double* B, int ldb, double* C, int ldc,
                      int m, int k, int n, char opA, char opB, bool acc) {
    gemm_impl(A, lda, B, ldb, C, ldc, m, k, n, opA, opB, acc, false);
}

namespace {

bool cholesky_impl(double* A, int n, double tol, bool par) {
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(A[1ll * i * n + i]));
    const double floor = tol > 0 ? tol * std::max(scale, 1.0) : 0.0;
    for (int j = 0; j < n; ++j) {
        double d = A[1ll * j * n + j];
        const double* lj = A + 1ll * j * n;
        for (int l = 0; l < j; ++l) d -= lj[l] * lj[l];
        if (d <= floor || !std::isfinite(d)) return false;
        d = std::sqrt(d);
        A[1ll * j * n + j] = d;
        const double inv = 1.0 / d;
#ifdef _OPENMP
        if (par && 1ll * (n - j) * j >= kParallelCutoff) {
#pragma omp parallel for schedule(static)
            for (int i = j + 1; i < n; ++i) {
                double s = A[1ll * i * n + j];
                const double* li = A + 1ll * i * n;
                for (int l = 0; l < j; ++l) s -= li[l] * lj[l];
                A[1ll * i * n + j] = s * inv;
            }
            continue;
        }
#endif
        for (int i = j + 1; i < n; ++i) {
            double s = A[1ll * i * n + j];
            const double* li = A + 1ll * i * n;
            for (int l = 0; l < j; ++l) s -= li[l] * lj[l];
            A[1ll * i * n + j] = s * inv;
        }
    }
    (void)par;
    return true;
}

}  // namespace

bool cholesky_lower(double* A, int n, double tol) {
    return cholesky_impl(A, n, tol, parallel_enabled());
}

bool cholesky_lower_serial(double* A, int n, double tol) { return cholesky_impl(A, n, tol, false); }

namespace {

double grid_min_impl(const std::function<double(const double*)>& f, int dim, int grid,
                     std::vector<double>& argmin, bool par) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("grid_min: dim must be 1..3");
    if (grid < 1) throw std::invalid_argument("grid_min: grid must be >= 1");
    long long total = 1;
    for (int i = 0; i < dim; ++i) total *= grid;

    double best = std::numeric_limits<double>::infinity();
    long long best_idx = 0;

#ifdef _OPENMP
    if (par && total >= 1024) {
#pragma omp parallel
        {
            double lbest = std::numeric_limits<double>::infinity();
            long long lidx = 0;
            double pt[3];
#pragma omp for schedule(static)
            for (long long idx = 0; idx < total; ++idx) {
                long long r = idx;
                for (int dmm = 0; dmm < dim; ++dmm) {
                    pt[dmm] = static_cast<double>(r % grid) / grid;
                    r /= grid;
                }
                const double v = f(pt);
                if (v < lbest || (v == lbest && idx < lidx)) {
                    lbest = v;
                    lidx = idx;
                }
            }
#pragma omp critical
            {
                if (lbest < best || (lbest == best && lidx < best_idx)) {
                    best = lbest;
                    best_idx = lidx;
                }
            }
        }
    } else
#endif
    {
        (void)par;
        double pt[3];
        for (long long idx = 0; idx < total; ++idx) {
            long long r = idx;
            for (int dmm = 0; dmm < dim; ++dmm) {
                pt[dmm] = static_cast<double>(r % grid) / grid;
                r /= grid;
            }
            const double v = f(pt);
            if (v < best) {
                best = v;
                best_idx = idx;
            }
        }
    }

    argmin.assign(dim, 0.0);
    long long r = best_idx;
    for (int dmm = 0; dmm < dim; ++dmm) {
        argmin[dmm] = static_cast<double>(r % grid) / grid;
        r /= grid;
    }
    return best;
}

}  // namespace

double grid_min(const std::function<double(const double*)>& f, int dim, int grid,
                std::vector<double>& argmin) {
    return grid_min_impl(f, dim, grid, argmin, parallel_enabled());
}

double grid_min_serial(const std::function<double(const double*)>& f, int dim, int grid,
                       std::vector<double>& argmin) {
    return grid_min_impl(f, dim, grid, argmin, false);
}

}  // namespace gsos::kernels
