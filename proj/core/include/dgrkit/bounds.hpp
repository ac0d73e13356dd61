#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dgrkit/sysmodel.hpp"

namespace dgr {

// Analytic bounds on the squared instability number M_t(A)^2, where
// M_t(A) is the supremum of prod_i ||A v_i|| over orthonormal t-frames.
// Both sides are driven by the singular values: the lower bound is
// (sigma_1^2/t)^t and the upper bound adds the tail mass
// delta = sum_{i=2}^t sigma_i^2 through a binomial expansion.
struct InstabilityBoundPair {
    double lower = 0.0;  // squared
    double upper = 0.0;  // squared
};

InstabilityBoundPair instability_bounds(const Eigen::MatrixXd& A, int order);

struct InstabilityEstimate {
    int order = 0;
    double value = 0.0;           // certified lower bound on M_t(A)
    double analytic_lower = 0.0;  // squared
    double analytic_upper = 0.0;  // squared
    Eigen::MatrixXd frame;        // n x t, orthonormal columns achieving value
};

// Maximizes prod_i ||A v_i|| over orthonormal frames by block-coordinate
// ascent with random restarts. The spread-out frame around the top
// right-singular direction is always used as one start, so the returned
// value never falls below the analytic lower bound. Deterministic per
// seed, and non-decreasing in the restart count.
InstabilityEstimate estimate_instability(const Eigen::MatrixXd& A, int order,
                                         int restarts, std::uint64_t seed);

// Realized per-trajectory bound recursion
//   L_1 = ||A zbar_0||,   L_{t+1} = a_t + sum_{r=1}^t b_{t,r} L_r
// with a_t = ||atilde^t A zbar_0|| and
// b_{t,r} = sqrt(||atilde^{t-r} btilde zbar_r||^2 +
//               ||atilde^{t-r} delta_alpha wbar_r||^2).
// Every state of the closed-loop run satisfies ||x_t|| <= L_t ||x_0||.
struct BoundSeries {
    std::vector<double> a;               // a[t], t = 0..T-1
    std::vector<std::vector<double>> b;  // b[t][r-1] for 1 <= r <= t
    std::vector<double> L;               // L[0] = 1 by convention; L[1..T]
    double alpha = 0.0;
};

// zbar/wbar are the normalized novel/spanned components of each state
// (unit vectors, or exactly zero per the zero-vector convention);
// zbar[0] must be x_0 / ||x_0||.
BoundSeries trajectory_bound_series(const LtiSystem& sys, double alpha,
                                    const std::vector<Eigen::VectorXd>& zbar,
                                    const std::vector<Eigen::VectorXd>& wbar);

// delta_alpha = B (B^+ - G_alpha) A: the input-channel mismatch introduced
// by regularizing the gain; identically zero at alpha = 0.
Eigen::MatrixXd input_mismatch(const LtiSystem& sys, double alpha);

// Normalized novel/spanned direction pairs realized by a state sequence,
// ready to feed trajectory_bound_series: entry r splits states[r] against
// the span of states[0..r-1].
struct RealizedDirections {
    std::vector<Eigen::VectorXd> zbar;
    std::vector<Eigen::VectorXd> wbar;
};

RealizedDirections realized_directions(const std::vector<Eigen::VectorXd>& states);

// Instability-number combination bound on ||x_t|| / ||x_0||, with every
// M_r replaced by its certified analytic upper bound. The special path
// needs R(A) inside R(B); the general path needs atilde * btilde == 0.
double m_based_bound(const LtiSystem& sys, int order, bool use_special);

}  // namespace dgr
