#include "dgrkit/regan.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dgrkit/numkernel.hpp"

namespace dgr {

Eigen::MatrixXd atilde(const LtiSystem& sys) {
    sys.validate();
    const Eigen::MatrixXd proj = range_projector(sys.B);
    return sys.A - proj * sys.A;
}

Eigen::MatrixXd btilde(const LtiSystem& sys) {
    sys.validate();
    return range_projector(sys.B) * sys.A;
}

SpectralVerdict is_regularizable(const LtiSystem& sys) {
    SpectralVerdict v;
    v.value = spectral_radius(atilde(sys));
    v.verdict = v.value < 1.0 - kStabilityMargin;
    return v;
}

SpectralVerdict is_contractible(const LtiSystem& sys) {
    SpectralVerdict v;
    v.value = operator_norm(atilde(sys));
    v.verdict = v.value < 1.0;
    return v;
}

namespace {

std::vector<PbhModeRank> pbh_ranks_impl(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& M, bool stacked) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n) {
        throw InvalidInput("pbh test: A must be square");
    }
    if ((stacked ? M.cols() : M.rows()) != n) {
        throw InvalidInput("pbh test: companion matrix dimension mismatch");
    }
    const Eigen::VectorXcd lambdas = A.eigenvalues();
    const Eigen::MatrixXcd Ac = A.cast<std::complex<double>>();
    const Eigen::MatrixXcd Mc = M.cast<std::complex<double>>();

    std::vector<PbhModeRank> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::MatrixXcd pencil;
        const Eigen::MatrixXcd shifted =
            Ac - lambdas(i) * Eigen::MatrixXcd::Identity(n, n);
        if (stacked) {
            pencil.resize(n + M.rows(), n);
            pencil.topRows(n) = shifted;
            pencil.bottomRows(M.rows()) = Mc;
        } else {
            pencil.resize(n, n + M.cols());
            pencil.leftCols(n) = shifted;
            pencil.rightCols(M.cols()) = Mc;
        }
        Eigen::JacobiSVD<Eigen::MatrixXcd> dec(pencil);
        const Eigen::VectorXd sv = dec.singularValues();
        const double tol = sv(0) * static_cast<double>(std::max(pencil.rows(), pencil.cols())) *
                           std::numeric_limits<double>::epsilon();
        Eigen::Index rank = 0;
        for (Eigen::Index k = 0; k < sv.size(); ++k) {
            if (sv(k) > tol) ++rank;
        }
        out.push_back({lambdas(i), rank, rank < n});
    }
    return out;
}

}  // namespace

std::vector<PbhModeRank> pbh_mode_ranks(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& B) {
    return pbh_ranks_impl(A, B, /*stacked=*/false);
}

std::vector<PbhModeRank> pbh_mode_ranks_stacked(const Eigen::MatrixXd& A,
                                                const Eigen::MatrixXd& C) {
    return pbh_ranks_impl(A, C, /*stacked=*/true);
}

bool pbh_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    for (const auto& mode : pbh_mode_ranks(A, B)) {
        if (std::abs(mode.eigenvalue) >= 1.0 - kStabilityMargin && mode.deficient) {
            return false;
        }
    }
    return true;
}

bool pbh_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C) {
    for (const auto& mode : pbh_mode_ranks_stacked(A, C)) {
        if (std::abs(mode.eigenvalue) >= 1.0 - kStabilityMargin && mode.deficient) {
            return false;
        }
    }
    return true;
}

std::optional<LmiWitness> lyapunov_certificate(const LtiSystem& sys) {
    const Eigen::MatrixXd At = atilde(sys);
    if (spectral_radius(At) >= 1.0 - kStabilityMargin) {
        return std::nullopt;
    }
    LmiWitness w;
    w.kind = WitnessKind::Lyapunov;
    w.P = solve_discrete_lyapunov(At);
    return w;
}

namespace {

// min-eigenvalue check with a relative margin; strict LMIs need slack.
bool definite_positive(const Eigen::MatrixXd& block) {
    const Eigen::MatrixXd sym = 0.5 * (block + block.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    return es.eigenvalues().minCoeff() > 1e-9 * scale;
}

bool definite_negative(const Eigen::MatrixXd& block) {
    return definite_positive(-block);
}

bool semidefinite_positive(const Eigen::MatrixXd& block) {
    const Eigen::MatrixXd sym = 0.5 * (block + block.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    return es.eigenvalues().minCoeff() >= -1e-9 * scale;
}

void require_square(const Eigen::MatrixXd& M, Eigen::Index n, const char* what) {
    if (M.rows() != n || M.cols() != n) {
        throw InvalidWitness(std::string("verify_lmi_witness: ") + what +
                             " must be n x n");
    }
}

void require_symmetric(const Eigen::MatrixXd& M, const char* what) {
    if (!M.isApprox(M.transpose(), 1e-10)) {
        throw InvalidWitness(std::string("verify_lmi_witness: ") + what +
                             " must be symmetric");
    }
}

}  // namespace

bool verify_lmi_witness(const LtiSystem& sys, const LmiWitness& w) {
    sys.validate();
    const Eigen::Index n = sys.state_dim();
    const Eigen::MatrixXd At = atilde(sys);
    require_square(w.P, n, "P");
    require_symmetric(w.P, w.kind == WitnessKind::SchurW ? "W" : "P");

    switch (w.kind) {
        case WitnessKind::Lyapunov: {
            return definite_positive(w.P) &&
                   definite_negative(At.transpose() * w.P * At - w.P);
        }
        case WitnessKind::SchurW: {
            const Eigen::MatrixXd& W = w.P;
            Eigen::MatrixXd block(2 * n, 2 * n);
            block.topLeftCorner(n, n) = W;
            block.topRightCorner(n, n) = At * W;
            block.bottomLeftCorner(n, n) = W * At.transpose();
            block.bottomRightCorner(n, n) = W;
            return definite_positive(block);
        }
        case WitnessKind::SlackG: {
            require_square(w.G, n, "G");
            Eigen::MatrixXd block(2 * n, 2 * n);
            block.topLeftCorner(n, n) = w.P;
            block.topRightCorner(n, n) = At.transpose() * w.G.transpose();
            block.bottomLeftCorner(n, n) = w.G * At;
            block.bottomRightCorner(n, n) = w.G + w.G.transpose() - w.P;
            return definite_positive(w.P) && definite_positive(block);
        }
        case WitnessKind::SlackGH: {
            require_square(w.G, n, "G");
            require_square(w.H, n, "H");
            const Eigen::MatrixXd proj_perp =
                Eigen::MatrixXd::Identity(n, n) - range_projector(sys.B);
            Eigen::MatrixXd block(2 * n, 2 * n);
            block.topLeftCorner(n, n) =
                w.G * sys.A + sys.A.transpose() * w.G.transpose() - w.P;
            block.topRightCorner(n, n) = sys.A.transpose() * w.H.transpose() - w.G;
            block.bottomLeftCorner(n, n) = w.H * sys.A - w.G.transpose();
            block.bottomRightCorner(n, n) =
                proj_perp * w.P * proj_perp - w.H - w.H.transpose();
            return definite_positive(w.P) && definite_negative(block);
        }
    }
    throw InvalidWitness("verify_lmi_witness: unknown kind");
}

bool verify_polytopic(const std::vector<Eigen::MatrixXd>& vertices,
                      const Eigen::MatrixXd& B, const Eigen::MatrixXd& S_basis,
                      const std::vector<Eigen::MatrixXd>& P,
                      const Eigen::MatrixXd& G, const Eigen::MatrixXd& H) {
    if (vertices.empty() || vertices.size() != P.size()) {
        throw InvalidInput("verify_polytopic: need one P per vertex");
    }
    const Eigen::Index n = vertices.front().rows();
    for (const auto& Ai : vertices) {
        if (Ai.rows() != n || Ai.cols() != n) {
            throw InvalidInput("verify_polytopic: vertices must be square, same size");
        }
    }
    for (const auto& Pi : P) {
        if (Pi.rows() != n || Pi.cols() != n) {
            throw InvalidInput("verify_polytopic: P_i dimension mismatch");
        }
    }
    if (B.rows() != n || G.rows() != n || G.cols() != n || H.rows() != n ||
        H.cols() != n || S_basis.rows() != n) {
        throw InvalidInput("verify_polytopic: dimension mismatch");
    }

    const Eigen::MatrixXd proj_S = range_projector(S_basis);  // orthonormalizes
    const Eigen::MatrixXd proj_perp =
        Eigen::MatrixXd::Identity(n, n) - range_projector(B);

    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Eigen::MatrixXd& Ai = vertices[i];
        const Eigen::MatrixXd& Pi = P[i];

        Eigen::MatrixXd hyp(2 * n, 2 * n);
        hyp.topLeftCorner(n, n) = G * Ai + Ai.transpose() * G.transpose() - Pi;
        hyp.topRightCorner(n, n) = Ai.transpose() * H.transpose() - G;
        hyp.bottomLeftCorner(n, n) = H * Ai - G.transpose();
        hyp.bottomRightCorner(n, n) = proj_S * Pi * proj_S - H - H.transpose();
        if (!definite_negative(hyp)) return false;

        Eigen::MatrixXd coupling(2 * n, 2 * n);
        coupling.topLeftCorner(n, n) = Pi;
        coupling.topRightCorner(n, n) = Pi * proj_perp;
        coupling.bottomLeftCorner(n, n) = proj_perp * Pi;
        coupling.bottomRightCorner(n, n) = proj_S * Pi * proj_S;
        if (!semidefinite_positive(coupling)) return false;
    }
    return true;
}

RegularizabilityReport analyze(const LtiSystem& sys) {
    sys.validate();
    RegularizabilityReport rep;
    rep.rho_A = spectral_radius(sys.A);
    const Eigen::MatrixXd At = atilde(sys);
    rep.rho_Atilde = spectral_radius(At);
    rep.atilde_norm = operator_norm(At);
    rep.regularizable = rep.rho_Atilde < 1.0 - kStabilityMargin;
    rep.marginal = std::abs(rep.rho_Atilde - 1.0) <= kStabilityMargin;
    rep.contractible = rep.atilde_norm < 1.0;
    rep.stabilizable = pbh_stabilizable(sys.A, sys.B);
    rep.detectable_transpose = pbh_detectable(sys.A, sys.B.transpose());
    if (rep.regularizable) {
        rep.lyapunov_P = solve_discrete_lyapunov(At);
    }
    return rep;
}

}  // namespace dgr
