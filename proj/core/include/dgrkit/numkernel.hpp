#pragma once

#include <Eigen/Dense>

#include "dgrkit/errors.hpp"

namespace dgr {

// Thin SVD of a real dense matrix together with its numerical rank.
// Rank tolerance is the standard sigma_1 * max(rows, cols) * machine epsilon.
struct SvdFactors {
    Eigen::MatrixXd U;                // rows x k, orthonormal columns
    Eigen::VectorXd singular_values;  // k, non-increasing, non-negative
    Eigen::MatrixXd V;                // cols x k, orthonormal columns
    Eigen::Index numerical_rank = 0;

    double rank_tolerance() const;
};

SvdFactors svd(const Eigen::MatrixXd& M);

// Numerical rank under the SVD tolerance above.
Eigen::Index numerical_rank(const Eigen::MatrixXd& M);

// Moore-Penrose pseudoinverse; singular values at or below the rank
// tolerance are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& M);

// Orthogonal projector onto the column space of M (U_r U_r^T from the
// thin SVD). Symmetric, idempotent, and fixes every column of M.
Eigen::MatrixXd range_projector(const Eigen::MatrixXd& M);

// Largest eigenvalue modulus.
double spectral_radius(const Eigen::MatrixXd& M);

// Largest singular value.
double operator_norm(const Eigen::MatrixXd& M);

// Threshold below which a residual direction counts as zero when deciding
// whether a new sample leaves the span of the old data.
inline double residual_threshold(const Eigen::VectorXd& x) {
    return 1e-10 * std::max(1.0, x.norm());
}

// Result of appending one column to a matrix whose pseudoinverse is known.
struct PinvAppendResult {
    Eigen::MatrixXd pinv;      // (t+1) x n pseudoinverse of [X, x]
    Eigen::VectorXd residual;  // component of x orthogonal to R(X)
    bool in_range = false;     // x was (numerically) inside R(X)
};

// Rank-one update of the pseudoinverse under a column append.
//
// X_pinv must be the pseudoinverse of the current t-column data matrix X and
// range_proj its range projector X X^+. When the appended column has a
// residual above residual_threshold() the new-direction update is used,
// otherwise the in-range update; both reproduce the fresh pseudoinverse of
// [X, x]. X_pinv may have zero rows (empty history).
PinvAppendResult append_column_pinv(const Eigen::MatrixXd& X_pinv,
                                    const Eigen::MatrixXd& range_proj,
                                    const Eigen::VectorXd& x);

// Solves F^T P F - P = -I for P > 0 by the doubling iteration.
// Throws NotSchurStable unless rho(F) < 1.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& F);

struct DareSolution {
    Eigen::MatrixXd P;  // stabilizing solution, symmetric positive definite
    Eigen::MatrixXd K;  // (R + B^T P B)^{-1} B^T P A
};

// Fixed-point iteration for the discrete algebraic Riccati equation.
// Adequate for the desk-scale systems this library targets (n <= 20);
// throws DareDiverged when the iteration blows up or fails to settle.
DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        int max_iterations = 10000);

}  // namespace dgr
