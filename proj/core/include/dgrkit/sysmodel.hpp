#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "dgrkit/errors.hpp"

namespace dgr {

using Rng = std::mt19937_64;

// splitmix64 step; derives independent sub-seeds from one master seed so
// that separate random streams never alias.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Discrete-time plant x' = A x + B u, optionally with i.i.d. Gaussian
// process noise of per-component standard deviation noise_std.
struct LtiSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    double noise_std = 0.0;

    Eigen::Index state_dim() const { return A.rows(); }
    Eigen::Index input_dim() const { return B.cols(); }

    // Throws InvalidInput unless A is square, B has matching rows, all
    // entries are finite, and noise_std >= 0.
    void validate() const;
};

// One noiseless plant step A x + B u.
Eigen::VectorXd step(const LtiSystem& sys, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u);

// One plant step with process noise drawn from rng (no draw when
// noise_std == 0, so the rng stream is untouched in the noiseless case).
Eigen::VectorXd step(const LtiSystem& sys, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& u, Rng& rng);

// Copy of sys with A replaced by A + dA, dA entries i.i.d. N(0, std^2),
// drawn deterministically from the seed. B is untouched.
LtiSystem perturb(const LtiSystem& sys, double std, std::uint64_t seed);

// Eigenbasis support of an initial state.
struct ExcitationReport {
    int excited_count = 0;              // modes with coefficient above tol
    int distinct_eigenvalue_count = 0;  // distinct eigenvalues among them
    int in_input_range = 0;             // excited eigenvectors inside R(B)
    int in_input_range_complement = 0;  // excited eigenvectors inside R(B)^perp
    int unclassified = 0;               // excited but straddling both subspaces
    std::vector<std::complex<double>> eigenvalues;  // all n
    std::vector<double> coefficients;               // |c_i| of x0 in the eigenbasis
    std::vector<bool> excited;                      // per mode
};

// Expands x0 in the eigenbasis of A and classifies the excited modes
// against R(B). Throws DefectiveMatrix when the eigenvector basis is too
// ill-conditioned (condition number above condition_cap) to trust.
ExcitationReport analyze_mode_excitation(const LtiSystem& sys,
                                         const Eigen::VectorXd& x0,
                                         double tol = 1e-8,
                                         double condition_cap = 1e8);

// k x t moment matrix with row l = (1, lambda_l, ..., lambda_l^{t-1}).
// Full column rank whenever at least t of the nodes are pairwise distinct.
Eigen::MatrixXcd vandermonde(const std::vector<std::complex<double>>& eigenvalues,
                             int t);

}  // namespace dgr
