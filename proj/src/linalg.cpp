#include "gsos/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gsos/kernels.hpp"

namespace gsos {

CMat CMat::eye(int n) {
    CMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

CMat CMat::adjoint() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
    return r;
}

CMat CMat::transpose() const {
    CMat r(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
    return r;
}

CMat CMat::conj() const {
    CMat r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j) r(i, j) = std::conj((*this)(i, j));
    return r;
}

double CMat::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

bool CMat::is_real(double tol) const {
    for (const auto& v : a_)
        if (std::abs(v.imag()) > tol) return false;
    return true;
}

CMat& CMat::operator+=(const CMat& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
}

CMat& CMat::operator-=(const CMat& o) {
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
}

CMat& CMat::operator*=(cd s) {
    for (auto& v : a_) v *= s;
    return *this;
}

CMat operator+(CMat a, const CMat& b) { return a += b; }
CMat operator-(CMat a, const CMat& b) { return a -= b; }
CMat operator*(cd s, CMat a) { return a *= s; }

CMat mul(const CMat& a, const CMat& b, char opA, char opB) {
    const int m = opA == 'N' ? a.rows() : a.cols();
    const int k = opA == 'N' ? a.cols() : a.rows();
    const int kb = opB == 'N' ? b.rows() : b.cols();
    const int n = opB == 'N' ? b.cols() : b.rows();
    if (k != kb) throw LinalgError("mul: inner dimension mismatch");
    CMat c(m, n);
    kernels::gemm(a.data(), a.cols(), b.data(), b.cols(), c.data(), c.cols(), m, k, n, opA, opB);
    return c;
}

cd trace(const CMat& a) {
    cd t = 0.0;
    for (int i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
    return t;
}

double max_abs_diff(const CMat& a, const CMat& b) {
    double m = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

CMat kron(const CMat& a, const CMat& b) {
    CMat r(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) {
            const cd aij = a(i, j);
            if (aij == cd(0)) continue;
            for (int k = 0; k < b.rows(); ++k)
                for (int l = 0; l < b.cols(); ++l)
                    r(i * b.rows() + k, j * b.cols() + l) = aij * b(k, l);
        }
    return r;
}

RMat RMat::eye(int n) {
    RMat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double RMat::max_abs() const {
    double m = 0.0;
    for (const auto& v : a_) m = std::max(m, std::abs(v));
    return m;
}

HermitianMatrix::HermitianMatrix(CMat a, double tol) {
    if (a.rows() != a.cols()) throw LinalgError("HermitianMatrix: matrix not square");
    const int n = a.rows();
    double dev = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            dev = std::max(dev, std::abs(a(i, j) - std::conj(a(j, i))));
    deviation_ = dev;
    if (dev > tol * (1.0 + a.max_abs()))
        throw LinalgError("HermitianMatrix: deviation " + std::to_string(dev) +
                          " exceeds hermiticity tolerance");
    for (int i = 0; i < n; ++i) {
        a(i, i) = a(i, i).real();
        for (int j = i + 1; j < n; ++j) {
            const cd v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            a(i, j) = v;
            a(j, i) = std::conj(v);
        }
    }
    m_ = std::move(a);
}

EigResult hermitian_eig(const HermitianMatrix& h) {
    const int n = h.dim();
    CMat a = h.mat();
    CMat v = CMat::eye(n);
    EigResult res;
    if (n == 0) return res;

    const double scale = std::max(a.max_abs(), 1e-300);
    const double stop = 1e-15 * scale;
    const int max_sweeps = 64;

    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= stop) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const cd apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag <= stop * 1e-2) continue;

                // Phase away a_pq, then a real Jacobi rotation on the pair.
                const cd u = apq / mag;         // unimodular
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const cd jqp = -s * std::conj(u);  // J: pp=c, pq=s, qp=-s*conj(u), qq=c*conj(u)
                const cd jqq = c * std::conj(u);

                for (int i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const cd aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip + jqp * aiq;
                    a(i, q) = s * aip + jqq * aiq;
                    a(p, i) = std::conj(a(i, p));
                    a(q, i) = std::conj(a(i, q));
                }
                a(p, p) = app - t * mag;
                a(q, q) = aqq + t * mag;
                a(p, q) = 0.0;
                a(q, p) = 0.0;

                for (int i = 0; i < n; ++i) {
                    const cd vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip + jqp * viq;
                    v(i, q) = s * vip + jqq * viq;
                }
            }
        }
    }
    if (sweep >= max_sweeps)
        throw LinalgError("hermitian_eig: Jacobi sweeps did not converge (n=" + std::to_string(n) +
                          ")");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> diag(n);
    for (int i = 0; i < n; ++i) diag[i] = a(i, i).real();
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return diag[x] < diag[y]; });

    res.eigenvalues.resize(n);
    res.vectors = CMat(n, n);
    for (int k = 0; k < n; ++k) {
        res.eigenvalues[k] = diag[order[k]];
        for (int i = 0; i < n; ++i) res.vectors(i, k) = v(i, order[k]);
    }
    return res;
}

PsdCheck psd_check(const HermitianMatrix& a, double tol) {
    if (tol < 0) throw LinalgError("psd_check: tol must be >= 0");
    PsdCheck r;
    if (a.dim() == 0) {
        r.is_psd = true;
        return r;
    }
    const auto eig = hermitian_eig(a);
    r.lambda_min = eig.eigenvalues.front();
    r.is_psd = r.lambda_min >= -tol;
    return r;
}

PsdFactor psd_factor(const HermitianMatrix& a, double rank_tol) {
    const int n = a.dim();
    const auto eig = hermitian_eig(a);
    const double lmax = n ? eig.eigenvalues.back() : 0.0;
    const double thresh = rank_tol * std::max(1.0, lmax);
    if (n && eig.eigenvalues.front() < -thresh)
        throw LinalgError("psd_factor: input indefinite beyond tolerance (lambda_min=" +
                          std::to_string(eig.eigenvalues.front()) + ")");

    std::vector<int> keep;
    for (int i = n - 1; i >= 0; --i)  // decreasing pivot order
        if (eig.eigenvalues[i] > thresh) keep.push_back(i);

    PsdFactor f;
    f.rank = static_cast<int>(keep.size());
    f.factor = CMat(n, f.rank);
    for (int c = 0; c < f.rank; ++c) {
        const double s = std::sqrt(eig.eigenvalues[keep[c]]);
        for (int i = 0; i < n; ++i) f.factor(i, c) = s * eig.vectors(i, keep[c]);
    }
    CMat rec = f.rank ? mul(f.factor, f.factor, 'N', 'C') : CMat(n, n);
    f.residual = max_abs_diff(a.mat(), rec);
    return f;
}

RMat real_embedding(const CMat& a) {
    const int n = a.rows();
    RMat h(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const cd v = a(i, j);
            h(i, j) = v.real();
            h(i + n, j + n) = v.real();
            h(i, j + n) = -v.imag();
            h(i + n, j) = v.imag();
        }
    return h;
}

RMat real_embedding(const HermitianMatrix& a) { return real_embedding(a.mat()); }

bool chol_lower(RMat& a, double tol) {
    return kernels::cholesky_lower(a.data(), a.rows(), tol);
}

void chol_solve_inplace(const RMat& L, double* x, int nrhs) {
    const int n = L.rows();
    // forward: L y = b
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < nrhs; ++r) {
            double s = x[1ll * i * nrhs + r];
            for (int k = 0; k < i; ++k) s -= L(i, k) * x[1ll * k * nrhs + r];
            x[1ll * i * nrhs + r] = s / L(i, i);
        }
    }
    // backward: L^T x = y
    for (int i = n - 1; i >= 0; --i) {
        for (int r = 0; r < nrhs; ++r) {
            double s = x[1ll * i * nrhs + r];
            for (int k = i + 1; k < n; ++k) s -= L(k, i) * x[1ll * k * nrhs + r];
            x[1ll * i * nrhs + r] = s / L(i, i);
        }
    }
}

RMat sym_inverse_from_chol(const RMat& L) {
    const int n = L.rows();
    RMat linv(n, n);
    for (int j = 0; j < n; ++j) {
        linv(j, j) = 1.0 / L(j, j);
        for (int i = j + 1; i < n; ++i) {
            double s = 0.0;
            for (int k = j; k < i; ++k) s += L(i, k) * linv(k, j);
            linv(i, j) = -s / L(i, i);
        }
    }
    RMat inv(n, n);
    kernels::gemm_real(linv.data(), n, linv.data(), n, inv.data(), n, n, n, n, 'C', 'N');
    return inv;
}

}  // namespace gsos
