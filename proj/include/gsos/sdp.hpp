#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gsos/linalg.hpp"

namespace gsos {

/// One Hermitian coefficient entry of a constraint (or objective) matrix.
/// A term (block, row, col, coeff) contributes coeff at (row, col) and
/// conj(coeff) at (col, row); a diagonal term contributes its real part.
/// The constraint value is sum_blocks Re Tr(A* X).
struct SdpTerm {
    int block = 0;
    int row = 0;
    int col = 0;
    cd coeff;
};

struct SdpConstraint {
    std::vector<SdpTerm> terms;
    double rhs = 0.0;
};

/// Adds Re(w * X[r][c]) on block `b` to the constraint's left-hand side.
void add_entry(SdpConstraint& con, int b, int r, int c, cd w);

enum class SdpMode { FeasibilityMargin, Minimize };

/// Standard-form conic problem over Hermitian PSD blocks:
///   constraints  sum_j Re Tr(A_ij* X_j) = b_i,  X_j >= 0.
/// FeasibilityMargin maximizes t with X_j >= t I; Minimize takes an
/// objective sum_j Re Tr(C_j* X_j).
struct SdpProblem {
    std::vector<int> block_dims;
    std::vector<SdpConstraint> constraints;
    std::vector<CMat> objective;  // empty or one Hermitian matrix per block
    SdpMode mode = SdpMode::FeasibilityMargin;
};

struct SdpSettings {
    double feas_tol = 1e-8;
    double margin_tol = 1e-7;
    double cert_tol = 1e-8;
    double gap_tol = 1e-8;
    int max_iterations = 200;
    int max_block_dim = 600;
    bool debug_weak_duality = true;  // cross-check status/certificate on every solve
};

enum class SdpStatus { Feasible, Infeasible, Optimal, NumericalTrouble };

struct InfeasibilityCertificate {
    std::vector<double> y;  // sum_i y_i A_i <= 0 (lambda_max below cert_tol), y.b >= 1
};

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalTrouble;
    double margin = 0.0;         // FeasibilityMargin mode
    double objective = 0.0;      // Minimize mode
    std::vector<CMat> X;         // per-block Hermitian matrices
    std::vector<double> y;       // dual vector
    std::optional<InfeasibilityCertificate> certificate;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    std::string diagnostic;
};

SdpSolution solve(const SdpProblem& p, const SdpSettings& settings = {});

struct VerificationItem {
    std::string what;
    double slack = 0.0;  // >= 0 means the inequality holds
    bool pass = false;
};

struct VerificationReport {
    bool pass = false;
    std::vector<VerificationItem> items;
};

/// Recomputes every residual and certificate inequality from the problem
/// data with linalg primitives only. Never throws; it reports.
VerificationReport verify_solution(const SdpProblem& p, const SdpSolution& s,
                                   const SdpSettings& settings = {});

// Helpers shared with the certificate modules.
CMat constraint_matrix(const SdpConstraint& con, int block, int dim);
double constraint_value(const SdpConstraint& con, const std::vector<CMat>& X);
CMat certificate_combination(const SdpProblem& p, const std::vector<double>& y, int block);

}  // namespace gsos
