#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace gsos::kernels {

using cd = std::complex<double>;

/// Global switch between the OpenMP kernels and their serial reference
/// implementations. The references are kept for testing and benchmarking;
/// results agree to roundoff.
void set_parallel(bool on);
bool parallel_enabled();
int thread_count();

// C (m x n) = op(A) * op(B), row-major dense. opX: 'N' plain, 'C' conjugate
// transpose. `acc` accumulates into C instead of overwriting.
void gemm(const cd* A, int lda, const cd* B, int ldb, cd* C, int ldc, int m, int k, int n,
          char opA = 'N', char opB = 'N', bool acc = false);
void gemm_serial(const cd* A, int lda, const cd* B, int ldb, cd* C, int ldc, int m, int k, int n,
                 char opA = 'N', char opB = 'N', bool acc = false);

void gemm_real(const double* A, int lda, const double* B, int ldb, double* C, int ldc, int m,
               int k, int n, char opA = 'N', char opB = 'N', bool acc = false);
void gemm_real_serial(const double* A, int lda, const double* B, int ldb, double* C, int ldc,
                      int m, int k, int n, char opA = 'N', char opB = 'N', bool acc = false);

/// In-place lower Cholesky of a symmetric positive definite n x n matrix
/// (row-major, full storage; strict upper left untouched). Returns false if a
/// pivot drops below `tol` times the scale of the matrix.
bool cholesky_lower(double* A, int n, double tol = 0.0);
bool cholesky_lower_serial(double* A, int n, double tol = 0.0);

/// Minimum of f over the regular grid {0, 1/g, ..., (g-1)/g}^d, d <= 3.
/// Returns the minimum value and writes the argmin grid coordinates.
double grid_min(const std::function<double(const double*)>& f, int dim, int grid,
                std::vector<double>& argmin);
double grid_min_serial(const std::function<double(const double*)>& f, int dim, int grid,
                       std::vector<double>& argmin);

}  // namespace gsos::kernels
