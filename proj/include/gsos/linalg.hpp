#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsos {

using cd = std::complex<double>;

/// Dense complex matrix, row-major.
class CMat {
  public:
    CMat() = default;
    CMat(int rows, int cols, cd fill = cd(0)) : rows_(rows), cols_(cols), a_(1ll * rows * cols, fill) {}
    static CMat eye(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    cd& operator()(int i, int j) { return a_[1ll * i * cols_ + j]; }
    const cd& operator()(int i, int j) const { return a_[1ll * i * cols_ + j]; }
    cd* data() { return a_.data(); }
    const cd* data() const { return a_.data(); }

    CMat adjoint() const;
    CMat transpose() const;
    CMat conj() const;
    double max_abs() const;
    bool is_real(double tol = 0.0) const;

    CMat& operator+=(const CMat& o);
    CMat& operator-=(const CMat& o);
    CMat& operator*=(cd s);

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<cd> a_;
};

CMat operator+(CMat a, const CMat& b);
CMat operator-(CMat a, const CMat& b);
CMat operator*(cd s, CMat a);
CMat mul(const CMat& a, const CMat& b, char opA = 'N', char opB = 'N');
cd trace(const CMat& a);
double max_abs_diff(const CMat& a, const CMat& b);
CMat kron(const CMat& a, const CMat& b);

/// Dense real matrix, row-major (solver-internal workhorse).
class RMat {
  public:
    RMat() = default;
    RMat(int rows, int cols, double fill = 0.0)
        : rows_(rows), cols_(cols), a_(1ll * rows * cols, fill) {}
    static RMat eye(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double& operator()(int i, int j) { return a_[1ll * i * cols_ + j]; }
    const double& operator()(int i, int j) const { return a_[1ll * i * cols_ + j]; }
    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }
    double max_abs() const;

  private:
    int rows_ = 0, cols_ = 0;
    std::vector<double> a_;
};

struct LinalgError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Hermitian matrix with a validated/symmetrized payload. The constructor
/// replaces A by (A + A*)/2 and records the deviation; inputs further than
/// `tol * (1 + max|A|)` from Hermitian are rejected.
class HermitianMatrix {
  public:
    static constexpr double kDefaultTol = 1e-12;

    explicit HermitianMatrix(CMat a, double tol = kDefaultTol);
    int dim() const { return m_.rows(); }
    const CMat& mat() const { return m_; }
    double hermiticity_deviation() const { return deviation_; }

  private:
    CMat m_;
    double deviation_ = 0.0;
};

struct EigResult {
    std::vector<double> eigenvalues;  // ascending
    CMat vectors;                     // columns are eigenvectors, unitary
};

/// Full eigendecomposition by cyclic Jacobi with complex rotations.
/// Throws LinalgError if the sweep cap is hit before off-diagonal decay.
EigResult hermitian_eig(const HermitianMatrix& a);

struct PsdCheck {
    bool is_psd = false;
    double lambda_min = 0.0;
};

PsdCheck psd_check(const HermitianMatrix& a, double tol = 1e-8);

/// Factor B with A ~= B B*, columns ordered by decreasing pivot.
struct PsdFactor {
    int rank = 0;
    CMat factor;      // dim x rank
    double residual;  // max |A - B B*|
};

PsdFactor psd_factor(const HermitianMatrix& a, double rank_tol = 1e-8);

/// h(A) = [[Re A, -Im A], [Im A, Re A]]; doubles every eigenvalue
/// multiplicity and preserves positive semi-definiteness both ways.
RMat real_embedding(const HermitianMatrix& a);
RMat real_embedding(const CMat& a);

// Real symmetric helpers used by the SDP core (still dense, still exact
// about failure).
bool chol_lower(RMat& a, double tol = 0.0);            // in place, lower
void chol_solve_inplace(const RMat& L, double* x, int nrhs);  // L L^T x = b
RMat sym_inverse_from_chol(const RMat& L);

}  // namespace gsos
