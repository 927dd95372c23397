#include "gsos/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string_view>
#include <tuple>

#include "gsos/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gsos {

void add_entry(SdpConstraint& con, int b, int r, int c, cd w) {
    if (w == cd(0)) return;
    if (r == c) {
        if (w.real() != 0.0) con.terms.push_back({b, r, r, cd(w.real(), 0.0)});
    } else {
        con.terms.push_back({b, c, r, 0.5 * w});
    }
}

CMat constraint_matrix(const SdpConstraint& con, int block, int dim) {
    CMat m(dim, dim);
    for (const auto& t : con.terms) {
        if (t.block != block) continue;
        if (t.row == t.col) {
            m(t.row, t.row) += t.coeff.real();
        } else {
            m(t.row, t.col) += t.coeff;
            m(t.col, t.row) += std::conj(t.coeff);
        }
    }
    return m;
}

double constraint_value(const SdpConstraint& con, const std::vector<CMat>& X) {
    double v = 0.0;
    for (const auto& t : con.terms) {
        const CMat& x = X[t.block];
        if (t.row == t.col)
            v += t.coeff.real() * x(t.row, t.row).real();
        else
            v += 2.0 * std::real(t.coeff * x(t.col, t.row));
    }
    return v;
}

CMat certificate_combination(const SdpProblem& p, const std::vector<double>& y, int block) {
    const int dim = p.block_dims[block];
    CMat acc(dim, dim);
    for (std::size_t i = 0; i < p.constraints.size(); ++i) {
        if (y[i] == 0.0) continue;
        for (const auto& t : p.constraints[i].terms) {
            if (t.block != block) continue;
            if (t.row == t.col) {
                acc(t.row, t.row) += y[i] * t.coeff.real();
            } else {
                acc(t.row, t.col) += y[i] * t.coeff;
                acc(t.col, t.row) += y[i] * std::conj(t.coeff);
            }
        }
    }
    return acc;
}

namespace {

// Canonical real symmetric entry: a <= b, matrix value v at (a,b) (and (b,a)).
struct REntry {
    int block, a, b;
    double v;
};

struct RealRow {
    std::vector<REntry> entries;
    std::vector<double> f;  // free-variable coefficients
    double rhs = 0.0;
};

struct RealProblem {
    std::vector<int> dims;           // real block dimensions
    std::vector<RealRow> rows;
    std::vector<RMat> C;             // dense objective per block
    std::vector<double> cf;          // objective on free variables
    int nfree = 0;
};

double row_inner(const RealRow& x, const RealRow& y) {
    // Entries are kept sorted by (block, a, b); merge-join.
    double s = 0.0;
    std::size_t i = 0, j = 0;
    while (i < x.entries.size() && j < y.entries.size()) {
        const auto& e = x.entries[i];
        const auto& g = y.entries[j];
        const auto ka = std::tie(e.block, e.a, e.b);
        const auto kb = std::tie(g.block, g.a, g.b);
        if (ka < kb)
            ++i;
        else if (kb < ka)
            ++j;
        else {
            s += (e.a == e.b ? 1.0 : 2.0) * e.v * g.v;
            ++i;
            ++j;
        }
    }
    for (std::size_t k = 0; k < x.f.size(); ++k) s += x.f[k] * y.f[k];
    return s;
}

double row_value(const RealRow& r, const std::vector<RMat>& X, const std::vector<double>& f) {
    double s = 0.0;
    for (const auto& e : r.entries)
        s += (e.a == e.b ? 1.0 : 2.0) * e.v * X[e.block](e.a, e.b);
    for (std::size_t k = 0; k < r.f.size(); ++k) s += r.f[k] * f[k];
    return s;
}

void add_scaled_row(const RealRow& r, double w, std::vector<RMat>& out) {
    for (const auto& e : r.entries) {
        out[e.block](e.a, e.b) += w * e.v;
        if (e.a != e.b) out[e.block](e.b, e.a) += w * e.v;
    }
}

// <A, K> for general (possibly non-symmetric) K; the trace picks the
// symmetric part automatically.
double row_dot_general(const RealRow& r, const std::vector<RMat>& K) {
    double s = 0.0;
    for (const auto& e : r.entries) {
        if (e.a == e.b)
            s += e.v * K[e.block](e.a, e.a);
        else
            s += e.v * (K[e.block](e.a, e.b) + K[e.block](e.b, e.a));
    }
    return s;
}

struct BlockLayout {
    bool embedded = false;  // true: real dim = 2 * complex dim
    int cdim = 0;
    int rdim = 0;
};

// Expands one Hermitian term to canonical real entries (scaled h(A)/2 when
// embedded so that inner products match the complex convention).
void expand_term(const SdpTerm& t, const BlockLayout& lay, std::vector<REntry>& out) {
    const int n = lay.cdim;
    const auto push = [&](int a, int b, double v) {
        if (v == 0.0) return;
        if (a > b) std::swap(a, b);
        out.push_back({t.block, a, b, v});
    };
    if (!lay.embedded) {
        if (t.row == t.col)
            push(t.row, t.row, t.coeff.real());
        else
            push(t.row, t.col, t.coeff.real());
        return;
    }
    const int r = t.row, c = t.col;
    const double re = t.coeff.real(), im = t.coeff.imag();
    if (r == c) {
        push(r, r, 0.5 * re);
        push(r + n, r + n, 0.5 * re);
        return;
    }
    push(r, c, 0.5 * re);
    push(r + n, c + n, 0.5 * re);
    push(r, c + n, -0.5 * im);
    push(c, r + n, 0.5 * im);
}

struct IpmResult {
    bool converged = false;
    bool diverged_dual = false;  // dual objective exploded: primal infeasible ray
    std::vector<RMat> X, Z;
    std::vector<double> y, f;
    double pobj = 0.0, dobj = 0.0;
    double pinf = 0.0, dinf = 0.0, relgap = 0.0;
    int iterations = 0;
    std::string note;
};

class Ipm {
  public:
    Ipm(const RealProblem& p, const SdpSettings& s) : p_(p), st_(s) {}

    IpmResult run() {
        const int nb = static_cast<int>(p_.dims.size());
        const int m = static_cast<int>(p_.rows.size());
        const int k = p_.nfree;
        IpmResult out;

        double bmax = 0.0, cmax = 0.0;
        for (const auto& r : p_.rows) bmax = std::max(bmax, std::abs(r.rhs));
        for (const auto& c : p_.C) cmax = std::max(cmax, c.max_abs());
        for (double v : p_.cf) cmax = std::max(cmax, std::abs(v));

        std::vector<RMat> X(nb), Z(nb);
        for (int b = 0; b < nb; ++b) {
            X[b] = RMat::eye(p_.dims[b]);
            Z[b] = RMat::eye(p_.dims[b]);
            const double xi = std::max(10.0, 2.0 * bmax);
            const double zi = std::max(10.0, 2.0 * cmax);
            for (int i = 0; i < p_.dims[b]; ++i) {
                X[b](i, i) = xi;
                Z[b](i, i) = zi;
            }
        }
        std::vector<double> y(m, 0.0), f(k, 0.0);
        double total_dim = 0;
        for (int b = 0; b < nb; ++b) total_dim += p_.dims[b];

        std::vector<RMat> Rd(nb), Zinv(nb);
        std::vector<double> rp(m), rf(k);

        for (int iter = 0; iter < st_.max_iterations; ++iter) {
            out.iterations = iter + 1;

            // residuals
            for (int i = 0; i < m; ++i) rp[i] = p_.rows[i].rhs - row_value(p_.rows[i], X, f);
            for (int b = 0; b < nb; ++b) {
                Rd[b] = p_.C[b];
                for (int i = 0; i < X[b].rows(); ++i)
                    for (int j = 0; j < X[b].rows(); ++j) Rd[b](i, j) -= Z[b](i, j);
            }
            for (int i = 0; i < m; ++i)
                if (y[i] != 0.0) add_scaled_row(p_.rows[i], -y[i], Rd);
            for (int q = 0; q < k; ++q) {
                rf[q] = p_.cf[q];
                for (int i = 0; i < m; ++i) rf[q] -= p_.rows[i].f[q] * y[i];
            }

            double mu = 0.0;
            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) mu += X[b](i, j) * Z[b](i, j);
            }
            mu /= std::max(1.0, total_dim);

            double pinf = 0.0;
            for (int i = 0; i < m; ++i) pinf = std::max(pinf, std::abs(rp[i]));
            pinf /= 1.0 + bmax;
            double dinf = 0.0;
            for (int b = 0; b < nb; ++b) dinf = std::max(dinf, Rd[b].max_abs());
            for (int q = 0; q < k; ++q) dinf = std::max(dinf, std::abs(rf[q]));
            dinf /= 1.0 + cmax;

            double pobj = 0.0;
            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) pobj += p_.C[b](i, j) * X[b](i, j);
            }
            for (int q = 0; q < k; ++q) pobj += p_.cf[q] * f[q];
            double dobj = 0.0;
            for (int i = 0; i < m; ++i) dobj += p_.rows[i].rhs * y[i];
            const double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

            out.pinf = pinf;
            out.dinf = dinf;
            out.relgap = relgap;
            out.pobj = pobj;
            out.dobj = dobj;

            if (pinf <= st_.feas_tol && dinf <= st_.feas_tol && relgap <= st_.gap_tol) {
                out.converged = true;
                break;
            }
            // Divergence of the dual objective with a near-feasible dual is a
            // primal-infeasibility ray; the caller extracts the certificate.
            if (dobj > 1e8 * (1.0 + bmax) && dinf <= 1e-6) {
                out.diverged_dual = true;
                break;
            }

            // factor Z and invert
            bool ok = true;
            std::vector<RMat> Lz(nb);
            for (int b = 0; b < nb; ++b) {
                Lz[b] = Z[b];
                if (!chol_lower(Lz[b])) {
                    ok = false;
                    break;
                }
                Zinv[b] = sym_inverse_from_chol(Lz[b]);
            }
            if (!ok) {
                out.note = "dual iterate lost positive definiteness";
                break;
            }

            // Schur complement M_ij = tr(A_i Z^-1 A_j X), built column-wise.
            RMat M(m, m);
            std::vector<double> az(m), ax(m);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (kernels::parallel_enabled() && m > 8)
#endif
            for (int j = 0; j < m; ++j) {
                std::vector<RMat> U(nb);
                std::vector<bool> touched(nb, false);
                for (const auto& e : p_.rows[j].entries) {
                    if (!touched[e.block]) {
                        U[e.block] = RMat(p_.dims[e.block], p_.dims[e.block]);
                        touched[e.block] = true;
                    }
                    const int n = p_.dims[e.block];
                    const RMat& zi = Zinv[e.block];
                    const RMat& xx = X[e.block];
                    // U += v * (Zinv e_a e_b^T X + [a!=b] Zinv e_b e_a^T X)
                    for (int r = 0; r < n; ++r) {
                        const double za = zi(r, e.a);
                        const double zb = zi(r, e.b);
                        double* urow = U[e.block].data() + 1ll * r * n;
                        const double* xb = xx.data() + 1ll * e.b * n;
                        const double* xa = xx.data() + 1ll * e.a * n;
                        if (e.a == e.b) {
                            const double w = e.v * za;
                            for (int c2 = 0; c2 < n; ++c2) urow[c2] += w * xb[c2];
                        } else {
                            const double w1 = e.v * za, w2 = e.v * zb;
                            for (int c2 = 0; c2 < n; ++c2)
                                urow[c2] += w1 * xb[c2] + w2 * xa[c2];
                        }
                    }
                }
                for (int i = 0; i < m; ++i) {
                    double s = 0.0;
                    for (const auto& e : p_.rows[i].entries) {
                        if (!touched[e.block]) continue;
                        if (e.a == e.b)
                            s += e.v * U[e.block](e.a, e.a);
                        else
                            s += e.v * (U[e.block](e.a, e.b) + U[e.block](e.b, e.a));
                    }
                    M(i, j) = s;
                }
                az[j] = row_dot_general(p_.rows[j], Zinv);
                ax[j] = row_dot_general(p_.rows[j], X);
            }

            // Symmetrize against roundoff and factor with escalating
            // regularization.
            for (int i = 0; i < m; ++i)
                for (int j = i + 1; j < m; ++j) {
                    const double v = 0.5 * (M(i, j) + M(j, i));
                    M(i, j) = M(j, i) = v;
                }
            double mscale = 1e-300;
            for (int i = 0; i < m; ++i) mscale = std::max(mscale, M(i, i));
            RMat Lm;
            bool mok = false;
            for (double reg = 1e-14; reg <= 1e-5; reg *= 100.0) {
                Lm = M;
                for (int i = 0; i < m; ++i) Lm(i, i) += reg * mscale;
                if (chol_lower(Lm)) {
                    mok = true;
                    break;
                }
            }
            if (!mok) {
                out.note = "Schur complement not positive definite";
                break;
            }

            // precompute Z^-1 Rd X per block
            std::vector<RMat> K1(nb);
            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                RMat t1(n, n);
                kernels::gemm_real(Rd[b].data(), n, X[b].data(), n, t1.data(), n, n, n, n);
                K1[b] = RMat(n, n);
                kernels::gemm_real(Zinv[b].data(), n, t1.data(), n, K1[b].data(), n, n, n, n);
            }

            auto solve_system = [&](const std::vector<double>& g, const std::vector<double>& rhs_f,
                                    std::vector<double>& dy, std::vector<double>& df) {
                dy = g;
                chol_solve_inplace(Lm, dy.data(), 1);
                if (k == 0) {
                    df.clear();
                    return true;
                }
                // W = M^-1 F, Sff = F^T W, solve Sff df = F^T M^-1 g - rf
                RMat W(m, k);
                for (int i = 0; i < m; ++i)
                    for (int q = 0; q < k; ++q) W(i, q) = p_.rows[i].f[q];
                chol_solve_inplace(Lm, W.data(), k);
                RMat Sff(k, k);
                for (int q = 0; q < k; ++q)
                    for (int r = 0; r < k; ++r) {
                        double s = 0.0;
                        for (int i = 0; i < m; ++i) s += p_.rows[i].f[q] * W(i, r);
                        Sff(q, r) = s;
                    }
                std::vector<double> rhs(k);
                for (int q = 0; q < k; ++q) {
                    double s = -rhs_f[q];
                    for (int i = 0; i < m; ++i) s += p_.rows[i].f[q] * dy[i];
                    rhs[q] = s;
                }
                // tiny dense SPD solve with partial pivoting (k is small)
                std::vector<int> piv(k);
                std::iota(piv.begin(), piv.end(), 0);
                for (int col = 0; col < k; ++col) {
                    int best = col;
                    for (int r2 = col + 1; r2 < k; ++r2)
                        if (std::abs(Sff(r2, col)) > std::abs(Sff(best, col))) best = r2;
                    if (std::abs(Sff(best, col)) < 1e-300) return false;
                    if (best != col) {
                        for (int c2 = 0; c2 < k; ++c2) std::swap(Sff(col, c2), Sff(best, c2));
                        std::swap(rhs[col], rhs[best]);
                    }
                    for (int r2 = col + 1; r2 < k; ++r2) {
                        const double fmul = Sff(r2, col) / Sff(col, col);
                        if (fmul == 0.0) continue;
                        for (int c2 = col; c2 < k; ++c2) Sff(r2, c2) -= fmul * Sff(col, c2);
                        rhs[r2] -= fmul * rhs[col];
                    }
                }
                df.assign(k, 0.0);
                for (int r2 = k - 1; r2 >= 0; --r2) {
                    double s = rhs[r2];
                    for (int c2 = r2 + 1; c2 < k; ++c2) s -= Sff(r2, c2) * df[c2];
                    df[r2] = s / Sff(r2, r2);
                }
                for (int i = 0; i < m; ++i) {
                    double s = dy[i];
                    for (int q = 0; q < k; ++q) s -= W(i, q) * df[q];
                    dy[i] = s;
                }
                return true;
            };

            auto build_direction = [&](double sigma_mu, const std::vector<RMat>* corr,
                                       std::vector<double>& dy, std::vector<double>& df,
                                       std::vector<RMat>& dX, std::vector<RMat>& dZ) {
                std::vector<double> g(m);
                for (int i = 0; i < m; ++i) {
                    double gi = rp[i] - sigma_mu * az[i] + ax[i] + row_dot_general(p_.rows[i], K1);
                    if (corr) gi += row_dot_general(p_.rows[i], *corr);
                    g[i] = gi;
                }
                if (!solve_system(g, rf, dy, df)) return false;

                dZ.assign(nb, RMat());
                dX.assign(nb, RMat());
                for (int b = 0; b < nb; ++b) dZ[b] = Rd[b];
                for (int i = 0; i < m; ++i)
                    if (dy[i] != 0.0) add_scaled_row(p_.rows[i], -dy[i], dZ);
                for (int b = 0; b < nb; ++b) {
                    const int n = p_.dims[b];
                    RMat t1(n, n), t2(n, n);
                    kernels::gemm_real(dZ[b].data(), n, X[b].data(), n, t1.data(), n, n, n, n);
                    kernels::gemm_real(Zinv[b].data(), n, t1.data(), n, t2.data(), n, n, n, n);
                    RMat dx(n, n);
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j) {
                            double v = -X[b](i, j) - t2(i, j);
                            if (i == j) v += sigma_mu * Zinv[b](i, i);
                            else v += sigma_mu * Zinv[b](i, j);
                            if (corr) v -= (*corr)[b](i, j);
                            dx(i, j) = v;
                        }
                    // symmetrize
                    for (int i = 0; i < n; ++i)
                        for (int j = i + 1; j < n; ++j) {
                            const double v = 0.5 * (dx(i, j) + dx(j, i));
                            dx(i, j) = dx(j, i) = v;
                        }
                    dX[b] = std::move(dx);
                }
                return true;
            };

            auto max_step = [&](const std::vector<RMat>& S, const std::vector<RMat>& dS) {
                double alpha = 1.0;
                for (int b = 0; b < nb; ++b) {
                    const int n = p_.dims[b];
                    auto feasible = [&](double a) {
                        RMat T(n, n);
                        for (int i = 0; i < n; ++i)
                            for (int j = 0; j < n; ++j) T(i, j) = S[b](i, j) + a * dS[b](i, j);
                        return kernels::cholesky_lower(T.data(), n, 0.0);
                    };
                    if (feasible(alpha)) continue;
                    double lo = 0.0, hi = alpha;
                    for (int it2 = 0; it2 < 30; ++it2) {
                        const double mid = 0.5 * (lo + hi);
                        if (feasible(mid))
                            lo = mid;
                        else
                            hi = mid;
                    }
                    alpha = lo;
                }
                return alpha;
            };

            // predictor
            std::vector<double> dy_a, df_a;
            std::vector<RMat> dX_a, dZ_a;
            if (!build_direction(0.0, nullptr, dy_a, df_a, dX_a, dZ_a)) {
                out.note = "singular augmented system";
                break;
            }
            const double ap_a = max_step(X, dX_a);
            const double ad_a = max_step(Z, dZ_a);
            double mu_aff = 0.0;
            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j)
                        mu_aff += (X[b](i, j) + ap_a * dX_a[b](i, j)) *
                                  (Z[b](i, j) + ad_a * dZ_a[b](i, j));
            }
            mu_aff /= std::max(1.0, total_dim);
            mu_aff = std::max(mu_aff, 0.0);
            double sigma = std::pow(mu_aff / std::max(mu, 1e-300), 3.0);
            sigma = std::clamp(sigma, 0.0, 1.0);

            // corrector: second-order term Z^-1 dZ_aff dX_aff
            std::vector<RMat> corr(nb);
            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                RMat t1(n, n);
                kernels::gemm_real(dZ_a[b].data(), n, dX_a[b].data(), n, t1.data(), n, n, n, n);
                corr[b] = RMat(n, n);
                kernels::gemm_real(Zinv[b].data(), n, t1.data(), n, corr[b].data(), n, n, n, n);
            }
            std::vector<double> dy, df;
            std::vector<RMat> dX, dZ;
            if (!build_direction(sigma * mu, &corr, dy, df, dX, dZ)) {
                out.note = "singular augmented system (corrector)";
                break;
            }

            double tau = 0.9 + 0.09 * std::min(ap_a, ad_a);
            tau = std::min(tau, 0.98);
            const double ap = std::min(1.0, tau * max_step(X, dX));
            const double ad = std::min(1.0, tau * max_step(Z, dZ));
            if (ap < 1e-10 && ad < 1e-10) {
                out.note = "step length collapsed";
                break;
            }

            for (int b = 0; b < nb; ++b) {
                const int n = p_.dims[b];
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        X[b](i, j) += ap * dX[b](i, j);
                        Z[b](i, j) += ad * dZ[b](i, j);
                    }
            }
            for (int i = 0; i < m; ++i) y[i] += ad * dy[i];
            for (int q = 0; q < k; ++q) f[q] += ap * df[q];
        }

        out.X = std::move(X);
        out.Z = std::move(Z);
        out.y = std::move(y);
        out.f = std::move(f);
        return out;
    }

  private:
    const RealProblem& p_;
    const SdpSettings& st_;
};

struct PresolveOutcome {
    std::vector<int> kept;                  // indices of independent rows
    bool infeasible = false;                // inconsistent dependent row found
    std::vector<double> farkas;             // exact certificate over ORIGINAL rows
    std::string note;
};

// Dependent-row elimination on the (A_i | F_i) rows with the Gram-matrix
// variant of Gram-Schmidt; tolerance 1e-10 on unit-normalized rows.
PresolveOutcome presolve_rows(const std::vector<RealRow>& rows) {
    const int m = static_cast<int>(rows.size());
    PresolveOutcome out;
    std::vector<double> norms(m);
    RMat G(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j) {
            const double v = row_inner(rows[i], rows[j]);
            G(i, j) = v;
            G(j, i) = v;
        }
    for (int i = 0; i < m; ++i) norms[i] = std::sqrt(std::max(G(i, i), 0.0));

    const double dep_tol = 1e-10;
    std::vector<int> dependent;
    // pivoted Cholesky on the normalized Gram matrix
    RMat Gn(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double d = std::max(norms[i], 1e-300) * std::max(norms[j], 1e-300);
            Gn(i, j) = G(i, j) / d;
        }
    std::vector<double> diag(m);
    std::vector<int> order;
    std::vector<bool> used(m, false);
    RMat L(m, m);
    for (int i = 0; i < m; ++i) diag[i] = norms[i] > 0 ? 1.0 : 0.0;
    for (int step = 0; step < m; ++step) {
        int pivot = -1;
        double best = dep_tol * dep_tol;
        for (int i = 0; i < m; ++i)
            if (!used[i] && diag[i] > best) {
                best = diag[i];
                pivot = i;
            }
        if (pivot < 0) break;
        used[pivot] = true;
        const int r = static_cast<int>(order.size());
        order.push_back(pivot);
        L(pivot, r) = std::sqrt(diag[pivot]);
        for (int i = 0; i < m; ++i) {
            if (used[i] || norms[i] == 0) continue;
            double s = Gn(i, pivot);
            for (int t = 0; t < r; ++t) s -= L(i, t) * L(pivot, t);
            L(i, r) = s / L(pivot, r);
            diag[i] -= L(i, r) * L(i, r);
        }
    }
    for (int i = 0; i < m; ++i)
        if (!used[i]) dependent.push_back(i);

    out.kept = order;
    std::sort(out.kept.begin(), out.kept.end());

    if (dependent.empty()) return out;

    // For each dependent row, express it over the kept rows and test rhs
    // consistency; an inconsistent combination is an exact Farkas witness.
    const int rk = static_cast<int>(out.kept.size());
    RMat GP(rk, rk);
    for (int i = 0; i < rk; ++i)
        for (int j = 0; j < rk; ++j) GP(i, j) = G(out.kept[i], out.kept[j]);
    RMat LP = GP;
    if (!chol_lower(LP, 0.0)) {
        out.note = "presolve: pivot Gram block unexpectedly singular";
        return out;
    }
    double bscale = 1.0;
    for (const auto& r : rows) bscale = std::max(bscale, std::abs(r.rhs));
    for (int d : dependent) {
        std::vector<double> lam(rk);
        for (int i = 0; i < rk; ++i) lam[i] = G(out.kept[i], d);
        chol_solve_inplace(LP, lam.data(), 1);
        double rhs_comb = 0.0;
        for (int i = 0; i < rk; ++i) rhs_comb += lam[i] * rows[out.kept[i]].rhs;
        const double gap = rows[d].rhs - rhs_comb;
        if (std::abs(gap) <= 1e-10 * bscale) continue;  // consistent: drop
        out.infeasible = true;
        out.farkas.assign(m, 0.0);
        const double s = 1.0 / gap;  // sign fix makes y.b = 1
        out.farkas[d] = s;
        for (int i = 0; i < rk; ++i) out.farkas[out.kept[i]] = -s * lam[i];
        return out;
    }
    return out;
}

}  // namespace

SdpSolution solve(const SdpProblem& p, const SdpSettings& st) {
    SdpSolution sol;
    const int nb = static_cast<int>(p.block_dims.size());
    const int m = static_cast<int>(p.constraints.size());

    for (int b = 0; b < nb; ++b) {
        if (p.block_dims[b] < 1) throw std::invalid_argument("solve: block dimension must be >= 1");
        if (p.block_dims[b] > st.max_block_dim)
            throw std::invalid_argument("solve: block dimension exceeds cap of " +
                                        std::to_string(st.max_block_dim));
    }
    for (const auto& con : p.constraints)
        for (const auto& t : con.terms) {
            if (t.block < 0 || t.block >= nb) throw std::invalid_argument("solve: bad block index");
            if (t.row < 0 || t.col < 0 || t.row >= p.block_dims[t.block] ||
                t.col >= p.block_dims[t.block])
                throw std::invalid_argument("solve: constraint entry out of range");
        }
    if (p.mode == SdpMode::Minimize && p.objective.size() != static_cast<std::size_t>(nb))
        throw std::invalid_argument("solve: Minimize mode needs one objective matrix per block");

    // Decide real vs embedded representation: the problem is solved in real
    // arithmetic directly whenever every coefficient is real.
    bool all_real = true;
    for (const auto& con : p.constraints)
        for (const auto& t : con.terms)
            if (t.coeff.imag() != 0.0) all_real = false;
    if (p.mode == SdpMode::Minimize)
        for (const auto& c : p.objective)
            if (!c.is_real(0.0)) all_real = false;

    std::vector<BlockLayout> layout(nb);
    for (int b = 0; b < nb; ++b) {
        layout[b].cdim = p.block_dims[b];
        layout[b].embedded = !all_real;
        layout[b].rdim = all_real ? p.block_dims[b] : 2 * p.block_dims[b];
    }

    // normalization by the largest coefficient magnitude
    double amax = 0.0;
    for (const auto& con : p.constraints)
        for (const auto& t : con.terms) amax = std::max(amax, std::abs(t.coeff));
    const double kappa = amax > 0 ? 1.0 / amax : 1.0;

    const bool margin_mode = p.mode == SdpMode::FeasibilityMargin;
    double bmax_orig = 0.0;
    for (const auto& con : p.constraints) bmax_orig = std::max(bmax_orig, std::abs(con.rhs));
    const double cap = 1e6 * (1.0 + bmax_orig);

    RealProblem rp;
    rp.dims.resize(nb);
    for (int b = 0; b < nb; ++b) rp.dims[b] = layout[b].rdim;
    rp.nfree = margin_mode ? 1 : 0;

    std::vector<RealRow> user_rows(m);
    for (int i = 0; i < m; ++i) {
        RealRow row;
        for (const auto& t : p.constraints[i].terms) expand_term(t, layout[t.block], row.entries);
        // canonical merge
        std::sort(row.entries.begin(), row.entries.end(), [](const REntry& x, const REntry& y) {
            return std::tie(x.block, x.a, x.b) < std::tie(y.block, y.a, y.b);
        });
        std::vector<REntry> merged;
        for (const auto& e : row.entries) {
            if (!merged.empty() && merged.back().block == e.block && merged.back().a == e.a &&
                merged.back().b == e.b)
                merged.back().v += e.v;
            else
                merged.push_back(e);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const REntry& e) { return e.v == 0.0; }),
                     merged.end());
        row.entries = std::move(merged);
        for (auto& e : row.entries) e.v *= kappa;
        row.rhs = p.constraints[i].rhs * kappa;
        if (margin_mode) {
            double tr = 0.0;
            for (const auto& e : row.entries)
                if (e.a == e.b) tr += e.v;
            row.f.assign(1, tr);
        }
        user_rows[i] = std::move(row);
    }

    auto pre = presolve_rows(user_rows);
    if (pre.infeasible) {
        sol.status = SdpStatus::Infeasible;
        InfeasibilityCertificate cert;
        cert.y.resize(m);
        for (int i = 0; i < m; ++i) cert.y[i] = pre.farkas[i] * kappa;  // unscale rows
        // renormalize so that y.b = 1 in original units
        double q = 0.0;
        for (int i = 0; i < m; ++i) q += cert.y[i] * p.constraints[i].rhs;
        if (q > 0)
            for (auto& v : cert.y) v /= q;
        sol.certificate = cert;
        sol.y = cert.y;
        sol.diagnostic = "inconsistent dependent constraint rows";
        return sol;
    }

    const int mk = static_cast<int>(pre.kept.size());
    for (int i = 0; i < mk; ++i) rp.rows.push_back(user_rows[pre.kept[i]]);
    if (margin_mode) {
        // cap row: t + s_cap = CAP with a fresh 1x1 block
        rp.dims.push_back(1);
        RealRow caprow;
        caprow.entries.push_back({nb, 0, 0, 1.0});
        caprow.f.assign(1, 1.0);
        caprow.rhs = cap;
        rp.rows.push_back(std::move(caprow));
        rp.cf.assign(1, -1.0);  // minimize -t
    }
    rp.C.resize(rp.dims.size());
    for (std::size_t b = 0; b < rp.dims.size(); ++b) rp.C[b] = RMat(rp.dims[b], rp.dims[b]);
    if (p.mode == SdpMode::Minimize) {
        for (int b = 0; b < nb; ++b) {
            SdpConstraint tmp;
            const CMat& C = p.objective[b];
            for (int i = 0; i < C.rows(); ++i) {
                if (C(i, i).real() != 0.0) tmp.terms.push_back({b, i, i, C(i, i).real()});
                for (int j = i + 1; j < C.cols(); ++j)
                    if (C(i, j) != cd(0)) tmp.terms.push_back({b, i, j, C(i, j)});
            }
            std::vector<REntry> entries;
            for (const auto& t : tmp.terms) expand_term(t, layout[b], entries);
            for (const auto& e : entries) {
                rp.C[e.block](e.a, e.b) += e.v;
                if (e.a != e.b) rp.C[e.block](e.b, e.a) += e.v;
            }
        }
    }

    Ipm ipm(rp, st);
    IpmResult r = ipm.run();
    sol.iterations = r.iterations;
    sol.primal_residual = r.pinf;
    sol.dual_residual = r.dinf;
    sol.duality_gap = r.relgap;

    // map dual back to original rows (dropped rows get 0), unscaling kappa
    sol.y.assign(m, 0.0);
    for (int i = 0; i < mk; ++i) sol.y[pre.kept[i]] = r.y[i] * kappa;

    // map primal back to complex blocks
    auto extract_X = [&](const std::vector<RMat>& Xr, double shift) {
        std::vector<CMat> out(nb);
        for (int b = 0; b < nb; ++b) {
            const int n = layout[b].cdim;
            CMat xc(n, n);
            if (!layout[b].embedded) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) xc(i, j) = 0.5 * (Xr[b](i, j) + Xr[b](j, i));
            } else {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < n; ++j) {
                        const double re = 0.5 * (Xr[b](i, j) + Xr[b](i + n, j + n));
                        const double im = 0.5 * (Xr[b](i + n, j) - Xr[b](i, j + n));
                        xc(i, j) = cd(re, im);
                    }
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) {
                        const cd v = 0.5 * (xc(i, j) + std::conj(xc(j, i)));
                        xc(i, j) = v;
                        xc(j, i) = std::conj(v);
                    }
            }
            if (shift != 0.0)
                for (int i = 0; i < n; ++i) xc(i, i) += shift;
            out[b] = std::move(xc);
        }
        return out;
    };

    auto try_certificate = [&](std::string_view why) -> bool {
        double q = 0.0;
        for (int i = 0; i < m; ++i) q += sol.y[i] * p.constraints[i].rhs;
        if (q <= 0) return false;
        InfeasibilityCertificate cert;
        cert.y.resize(m);
        for (int i = 0; i < m; ++i) cert.y[i] = sol.y[i] / q;
        // independent verification with linalg primitives
        for (int b = 0; b < nb; ++b) {
            CMat acc = certificate_combination(p, cert.y, b);
            HermitianMatrix h(std::move(acc), 1e-6);
            const auto eig = hermitian_eig(h);
            const double lmax = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
            if (lmax > st.cert_tol) return false;
        }
        sol.certificate = std::move(cert);
        sol.status = SdpStatus::Infeasible;
        sol.diagnostic = std::string(why);
        return true;
    };

    if (margin_mode) {
        const double t = r.f.empty() ? 0.0 : r.f[0];
        sol.margin = t;
        sol.X = extract_X(r.X, t);
        if (r.converged && t >= st.margin_tol) {
            sol.status = SdpStatus::Feasible;
            if (st.debug_weak_duality) {
                // A verifying Farkas certificate must not coexist with a
                // feasible point.
                SdpSolution probe = sol;
                if (try_certificate("")) {
                    sol.status = SdpStatus::NumericalTrouble;
                    sol.diagnostic = "weak duality violated: certificate verified on feasible instance";
                    return sol;
                }
                sol = probe;
                sol.status = SdpStatus::Feasible;
            }
            return sol;
        }
        if (r.converged && t <= -st.margin_tol) {
            if (try_certificate("margin proves infeasibility")) return sol;
            sol.status = SdpStatus::NumericalTrouble;
            sol.diagnostic = "negative margin but certificate failed verification";
            return sol;
        }
        sol.status = SdpStatus::NumericalTrouble;
        std::ostringstream os;
        if (!r.converged)
            os << "no convergence in " << r.iterations << " iterations"
               << (r.note.empty() ? "" : ": " + r.note);
        else
            os << "margin " << t << " within margin_tol of the boundary";
        sol.diagnostic = os.str();
        return sol;
    }

    // Minimize mode
    sol.X = extract_X(r.X, 0.0);
    if (r.converged) {
        double obj = 0.0;
        for (int b = 0; b < nb; ++b) obj += std::real(trace(mul(p.objective[b], sol.X[b], 'N', 'N')));
        sol.objective = obj;
        sol.status = SdpStatus::Optimal;
        return sol;
    }
    if (r.diverged_dual && try_certificate("dual objective diverged")) return sol;
    sol.status = SdpStatus::NumericalTrouble;
    sol.diagnostic = r.note.empty() ? "no convergence" : r.note;
    return sol;
}

VerificationReport verify_solution(const SdpProblem& p, const SdpSolution& s,
                                   const SdpSettings& st) {
    VerificationReport rep;
    rep.pass = true;
    auto add = [&](std::string what, double slack) {
        VerificationItem it;
        it.what = std::move(what);
        it.slack = slack;
        it.pass = slack >= 0;
        rep.pass = rep.pass && it.pass;
        rep.items.push_back(std::move(it));
    };
    try {
        const int nb = static_cast<int>(p.block_dims.size());
        if (s.status == SdpStatus::Feasible || s.status == SdpStatus::Optimal) {
            double bscale = 1.0;
            for (const auto& c : p.constraints) bscale = std::max(bscale, std::abs(c.rhs));
            for (std::size_t i = 0; i < p.constraints.size(); ++i) {
                const double v = constraint_value(p.constraints[i], s.X);
                add("constraint " + std::to_string(i) + " residual",
                    st.feas_tol * bscale * 10 - std::abs(v - p.constraints[i].rhs));
            }
            for (int b = 0; b < nb; ++b) {
                HermitianMatrix h(s.X[b], 1e-9);
                const auto chk = psd_check(h, st.feas_tol);
                const double target =
                    s.status == SdpStatus::Feasible ? s.margin - st.feas_tol * 10 : -st.feas_tol * 10;
                add("block " + std::to_string(b) + " lambda_min above " + std::to_string(target),
                    chk.lambda_min - target);
            }
        } else if (s.status == SdpStatus::Infeasible) {
            if (!s.certificate) {
                add("certificate present", -1.0);
            } else {
                const auto& y = s.certificate->y;
                double q = 0.0;
                for (std::size_t i = 0; i < p.constraints.size(); ++i)
                    q += y[i] * p.constraints[i].rhs;
                add("certificate normalization y.b >= 1", q - 1.0 + 1e-9);
                for (int b = 0; b < nb; ++b) {
                    CMat acc = certificate_combination(p, y, b);
                    HermitianMatrix h(std::move(acc), 1e-6);
                    const auto eig = hermitian_eig(h);
                    const double lmax = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
                    add("certificate block " + std::to_string(b) + " lambda_max <= cert_tol",
                        st.cert_tol - lmax);
                }
            }
        } else {
            add("status " + std::string("NumericalTrouble: nothing to verify"), 0.0);
        }
    } catch (const std::exception& e) {
        VerificationItem it;
        it.what = std::string("verification error: ") + e.what();
        it.slack = -1.0;
        it.pass = false;
        rep.items.push_back(it);
        rep.pass = false;
    }
    return rep;
}

}  // namespace gsos
