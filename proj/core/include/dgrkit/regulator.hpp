#pragma once

#include <Eigen/Dense>

#include "dgrkit/numkernel.hpp"
#include "dgrkit/sysmodel.hpp"

namespace dgr {

// Regularized input pseudoinverse (alpha I + B^T B)^+ B^T. Equals B^+ at
// alpha = 0 and shrinks toward zero as alpha grows, trading regulation
// strength for input effort.
Eigen::MatrixXd regularized_input_pinv(const Eigen::MatrixXd& B, double alpha);

// Split of a state against the span of past data: the novel component z
// (orthogonal to the history) and the spanned component w, with z + w = x.
// An empty history yields z = x, w = 0.
struct ZwSplit {
    Eigen::VectorXd z;
    Eigen::VectorXd w;
};

ZwSplit decompose_zw(const Eigen::MatrixXd& history, const Eigen::VectorXd& x);

// Online regulator that rebuilds its gain from the full data history each
// step: K = G_alpha Y X^+ with a fresh pseudoinverse. The reference
// implementation; the recursive variant below must match it exactly.
class DgrRegulator {
public:
    // Starts with zero gain, so the first input is always zero.
    DgrRegulator(Eigen::MatrixXd B, double alpha, const Eigen::VectorXd& x0);

    // Ingest the measured response to the previously returned input and
    // return the next input to apply.
    Eigen::VectorXd step(const Eigen::VectorXd& x_next);

    // Input the regulator would apply to the latest observed state.
    Eigen::VectorXd current_input() const { return -K_ * x_last_; }

    const Eigen::MatrixXd& gain() const { return K_; }
    const Eigen::MatrixXd& data_matrix() const { return X_; }      // states so far
    const Eigen::MatrixXd& response_matrix() const { return Y_; }  // recovered A x samples
    double alpha() const { return alpha_; }
    int steps() const { return t_; }
    Eigen::Index data_rank() const;

    // Least-squares estimate of the state-coupling matrix from the data
    // collected so far. Throws InsufficientData before the first step.
    Eigen::MatrixXd identified_dynamics() const;

private:
    Eigen::MatrixXd B_;
    Eigen::MatrixXd G_;
    Eigen::MatrixXd X_;
    Eigen::MatrixXd Y_;
    Eigen::MatrixXd K_;
    Eigen::VectorXd x_last_;
    Eigen::VectorXd u_last_;
    double alpha_ = 0.0;
    int t_ = 0;
};

// Recursive variant: maintains the range projector P of the data and the
// running estimate Q = Y X^+ by rank-one updates, so each step costs one
// matrix-vector sweep instead of a fresh pseudoinverse. Gains match the
// batch regulator to rounding error.
class FdgrRegulator {
public:
    // x1 must be the plant's response to x0 under zero input.
    // Throws DegenerateStart when x0 is the zero vector.
    FdgrRegulator(Eigen::MatrixXd B, double alpha, const Eigen::VectorXd& x0,
                  const Eigen::VectorXd& x1);

    Eigen::VectorXd step(const Eigen::VectorXd& x_next);

    Eigen::VectorXd current_input() const { return -K_ * x_last_; }

    const Eigen::MatrixXd& gain() const { return K_; }
    const Eigen::MatrixXd& projector() const { return P_; }  // onto R(X)
    const Eigen::MatrixXd& estimate() const { return Q_; }   // Y X^+
    const Eigen::MatrixXd& data_pinv() const { return Xpinv_; }
    double alpha() const { return alpha_; }
    int steps() const { return t_; }

    Eigen::MatrixXd identified_dynamics() const { return Q_; }

private:
    Eigen::MatrixXd B_;
    Eigen::MatrixXd G_;
    Eigen::MatrixXd P_;
    Eigen::MatrixXd Q_;
    Eigen::MatrixXd K_;
    Eigen::MatrixXd Xpinv_;  // maintained incrementally, for diagnostics
    Eigen::VectorXd x_last_;
    Eigen::VectorXd u_last_;
    double alpha_ = 0.0;
    int t_ = 0;
};

}  // namespace dgr
