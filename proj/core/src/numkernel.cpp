#include "dgrkit/numkernel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>

namespace dgr {

namespace {

void require_finite(const Eigen::MatrixXd& M, const char* who) {
    if (!M.allFinite()) {
        throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
    }
}

}  // namespace

double SvdFactors::rank_tolerance() const {
    if (singular_values.size() == 0) return 0.0;
    const double dim = static_cast<double>(std::max(U.rows(), V.rows()));
    return singular_values(0) * dim * std::numeric_limits<double>::epsilon();
}

SvdFactors svd(const Eigen::MatrixXd& M) {
    require_finite(M, "svd");
    Eigen::JacobiSVD<Eigen::MatrixXd> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    SvdFactors f;
    f.U = dec.matrixU();
    f.singular_values = dec.singularValues();
    f.V = dec.matrixV();
    const double tol = f.rank_tolerance();
    f.numerical_rank = 0;
    for (Eigen::Index i = 0; i < f.singular_values.size(); ++i) {
        if (f.singular_values(i) > tol) ++f.numerical_rank;
    }
    return f;
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& M) {
    return svd(M).numerical_rank;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& M) {
    const SvdFactors f = svd(M);
    Eigen::MatrixXd result = Eigen::MatrixXd::Zero(M.cols(), M.rows());
    for (Eigen::Index i = 0; i < f.numerical_rank; ++i) {
        result.noalias() += (f.V.col(i) / f.singular_values(i)) * f.U.col(i).transpose();
    }
    return result;
}

Eigen::MatrixXd range_projector(const Eigen::MatrixXd& M) {
    const SvdFactors f = svd(M);
    const auto Ur = f.U.leftCols(f.numerical_rank);
    return Ur * Ur.transpose();
}

double spectral_radius(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) {
        throw InvalidInput("spectral_radius: matrix must be square");
    }
    require_finite(M, "spectral_radius");
    return M.eigenvalues().cwiseAbs().maxCoeff();
}

double operator_norm(const Eigen::MatrixXd& M) {
    require_finite(M, "operator_norm");
    if (M.size() == 0) return 0.0;
    return M.jacobiSvd().singularValues()(0);
}

PinvAppendResult append_column_pinv(const Eigen::MatrixXd& X_pinv,
                                    const Eigen::MatrixXd& range_proj,
                                    const Eigen::VectorXd& x) {
    const Eigen::Index n = x.size();
    if (X_pinv.cols() != n || range_proj.rows() != n || range_proj.cols() != n) {
        throw InvalidInput("append_column_pinv: dimension mismatch");
    }
    require_finite(x, "append_column_pinv");

    PinvAppendResult out;
    out.residual = x - range_proj * x;
    const Eigen::Index t = X_pinv.rows();
    out.pinv.resize(t + 1, n);

    const double znorm = out.residual.norm();
    if (znorm > residual_threshold(x)) {
        // New direction: the appended column grows the range.
        const Eigen::RowVectorXd zdag = out.residual.transpose() / (znorm * znorm);
        const Eigen::VectorXd gamma = X_pinv * x;
        out.pinv.topRows(t) = X_pinv - gamma * zdag;
        out.pinv.row(t) = zdag;
        out.in_range = false;
    } else {
        // Column already spanned; rank-one correction of the old rows.
        const Eigen::VectorXd gamma = X_pinv * x;
        const double eps_t = 1.0 / (gamma.squaredNorm() + 1.0);
        const Eigen::VectorXd zeta = X_pinv.transpose() * gamma;
        out.pinv.topRows(t) = X_pinv - eps_t * gamma * zeta.transpose();
        out.pinv.row(t) = eps_t * zeta.transpose();
        out.in_range = true;
    }
    return out;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& F) {
    if (F.rows() != F.cols()) {
        throw InvalidInput("solve_discrete_lyapunov: matrix must be square");
    }
    require_finite(F, "solve_discrete_lyapunov");
    const double rho = spectral_radius(F);
    if (rho >= 1.0 - 1e-9) {
        throw NotSchurStable("solve_discrete_lyapunov: spectral radius " +
                             std::to_string(rho) + " is not < 1");
    }

    // P = sum_k (F^T)^k F^k via squaring: each pass folds the tail
    // sum_{j>=2^i} into the head, so convergence is doubly exponential.
    const Eigen::Index n = F.rows();
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd G = F;
    for (int iter = 0; iter < 200; ++iter) {
        if ((G.cwiseAbs().maxCoeff() * P.norm()) < 1e-18) break;
        P = P + G.transpose() * P * G;
        G = G * G;
    }
    P = 0.5 * (P + P.transpose());

    const double residual = (F.transpose() * P * F - P +
                             Eigen::MatrixXd::Identity(n, n)).norm();
    if (!(residual <= 1e-8 * std::max(1.0, P.norm()))) {
        throw NotSchurStable("solve_discrete_lyapunov: residual " +
                             std::to_string(residual) + " did not converge");
    }
    return P;
}

DareSolution solve_dare(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                        int max_iterations) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
        R.rows() != m || R.cols() != m) {
        throw InvalidInput("solve_dare: inconsistent dimensions");
    }
    require_finite(A, "solve_dare");
    require_finite(B, "solve_dare");
    if (!Q.isApprox(Q.transpose(), 1e-10)) {
        throw InvalidInput("solve_dare: Q must be symmetric");
    }
    if (!R.isApprox(R.transpose(), 1e-10)) {
        throw InvalidInput("solve_dare: R must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> qe(Q);
    if (qe.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, Q.norm())) {
        throw InvalidInput("solve_dare: Q must be positive semidefinite");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> re(R);
    if (re.eigenvalues().minCoeff() <= 0.0) {
        throw InvalidInput("solve_dare: R must be positive definite");
    }

    Eigen::MatrixXd P = Q;
    bool converged = false;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const Eigen::MatrixXd BtP = B.transpose() * P;
        const Eigen::MatrixXd S = R + BtP * B;
        const Eigen::MatrixXd K = S.ldlt().solve(BtP * A);
        Eigen::MatrixXd P_next =
            A.transpose() * P * A - (A.transpose() * BtP.transpose()) * K + Q;
        P_next = 0.5 * (P_next + P_next.transpose());
        const double delta = (P_next - P).norm();
        P = P_next;
        if (!P.allFinite() || P.norm() > 1e150) {
            throw DareDiverged("solve_dare: iteration blew up");
        }
        if (delta <= 1e-10 * std::max(1.0, P.norm())) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        throw DareDiverged("solve_dare: no convergence after " +
                           std::to_string(max_iterations) + " iterations");
    }

    DareSolution sol;
    sol.P = P;
    const Eigen::MatrixXd BtP = B.transpose() * P;
    sol.K = (R + BtP * B).ldlt().solve(BtP * A);
    if (spectral_radius(A - B * sol.K) >= 1.0) {
        throw DareDiverged("solve_dare: converged but closed loop is not Schur stable");
    }
    return sol;
}

}  // namespace dgr
