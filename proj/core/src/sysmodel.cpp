#include "dgrkit/sysmodel.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "dgrkit/numkernel.hpp"

namespace dgr {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void LtiSystem::validate() const {
    if (A.rows() < 1 || A.rows() != A.cols()) {
        throw InvalidInput("LtiSystem: A must be square and non-empty");
    }
    if (B.rows() != A.rows() || B.cols() < 1) {
        throw InvalidInput("LtiSystem: B must have as many rows as A");
    }
    if (!A.allFinite() || !B.allFinite()) {
        throw InvalidInput("LtiSystem: non-finite entries");
    }
    if (!(noise_std >= 0.0)) {
        throw InvalidInput("LtiSystem: noise_std must be >= 0");
    }
}

namespace {

void check_step_dims(const LtiSystem& sys, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
    if (x.size() != sys.state_dim() || u.size() != sys.input_dim()) {
        throw InvalidInput("step: state/input dimension mismatch");
    }
}

}  // namespace

Eigen::VectorXd step(const LtiSystem& sys, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u) {
    check_step_dims(sys, x, u);
    return sys.A * x + sys.B * u;
}

Eigen::VectorXd step(const LtiSystem& sys, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, Rng& rng) {
    check_step_dims(sys, x, u);
    Eigen::VectorXd next = sys.A * x + sys.B * u;
    if (sys.noise_std > 0.0) {
        std::normal_distribution<double> gauss(0.0, sys.noise_std);
        for (Eigen::Index i = 0; i < next.size(); ++i) {
            next(i) += gauss(rng);
        }
    }
    return next;
}

LtiSystem perturb(const LtiSystem& sys, double std, std::uint64_t seed) {
    sys.validate();
    if (!(std >= 0.0)) {
        throw InvalidInput("perturb: std must be >= 0");
    }
    LtiSystem out = sys;
    if (std == 0.0) return out;
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, std);
    for (Eigen::Index i = 0; i < out.A.rows(); ++i) {
        for (Eigen::Index j = 0; j < out.A.cols(); ++j) {
            out.A(i, j) += gauss(rng);
        }
    }
    return out;
}

ExcitationReport analyze_mode_excitation(const LtiSystem& sys,
                                         const Eigen::VectorXd& x0,
                                         double tol, double condition_cap) {
    sys.validate();
    if (x0.size() != sys.state_dim()) {
        throw InvalidInput("analyze_mode_excitation: x0 dimension mismatch");
    }
    if (!(tol > 0.0)) {
        throw InvalidInput("analyze_mode_excitation: tol must be > 0");
    }
    const Eigen::Index n = sys.state_dim();

    Eigen::EigenSolver<Eigen::MatrixXd> es(sys.A);
    if (es.info() != Eigen::Success) {
        throw DefectiveMatrix("analyze_mode_excitation: eigendecomposition failed");
    }
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXcd lambdas = es.eigenvalues();

    Eigen::JacobiSVD<Eigen::MatrixXcd> vsvd(V);
    const double smin = vsvd.singularValues()(n - 1);
    const double smax = vsvd.singularValues()(0);
    if (smin <= 0.0 || smax / smin > condition_cap) {
        throw DefectiveMatrix(
            "analyze_mode_excitation: eigenvector basis condition number exceeds cap");
    }

    const Eigen::VectorXcd coeffs = V.fullPivLu().solve(x0.cast<std::complex<double>>());

    ExcitationReport rep;
    rep.eigenvalues.assign(lambdas.data(), lambdas.data() + n);
    rep.coefficients.resize(n);
    rep.excited.resize(n);

    const double excite_floor = tol * x0.norm();
    const Eigen::MatrixXd proj = range_projector(sys.B);
    const Eigen::MatrixXcd proj_c = proj.cast<std::complex<double>>();

    std::vector<std::complex<double>> distinct;
    const double rho = lambdas.cwiseAbs().maxCoeff();
    const double sep = tol * std::max(1.0, rho);

    for (Eigen::Index i = 0; i < n; ++i) {
        rep.coefficients[i] = std::abs(coeffs(i));
        const bool on = rep.coefficients[i] > excite_floor;
        rep.excited[i] = on;
        if (!on) continue;
        ++rep.excited_count;

        bool seen = false;
        for (const auto& mu : distinct) {
            if (std::abs(lambdas(i) - mu) <= sep) {
                seen = true;
                break;
            }
        }
        if (!seen) distinct.push_back(lambdas(i));

        const Eigen::VectorXcd v = V.col(i);  // unit column
        const double outside = (v - proj_c * v).norm();
        const double inside = (proj_c * v).norm();
        if (outside <= tol) {
            ++rep.in_input_range;
        } else if (inside <= tol) {
            ++rep.in_input_range_complement;
        } else {
            ++rep.unclassified;
        }
    }
    rep.distinct_eigenvalue_count = static_cast<int>(distinct.size());
    return rep;
}

Eigen::MatrixXcd vandermonde(const std::vector<std::complex<double>>& eigenvalues,
                             int t) {
    if (t < 1) {
        throw InvalidInput("vandermonde: t must be >= 1");
    }
    const Eigen::Index k = static_cast<Eigen::Index>(eigenvalues.size());
    Eigen::MatrixXcd L(k, t);
    for (Eigen::Index row = 0; row < k; ++row) {
        std::complex<double> p = 1.0;
        for (int col = 0; col < t; ++col) {
            L(row, col) = p;
            p *= eigenvalues[static_cast<std::size_t>(row)];
        }
    }
    return L;
}

}  // namespace dgr
