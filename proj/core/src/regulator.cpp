#include "dgrkit/regulator.hpp"

#include <utility>

namespace dgr {

Eigen::MatrixXd regularized_input_pinv(const Eigen::MatrixXd& B, double alpha) {
    if (!(alpha >= 0.0)) {
        throw InvalidInput("regularized_input_pinv: alpha must be >= 0");
    }
    if (!B.allFinite()) {
        throw InvalidInput("regularized_input_pinv: non-finite entries");
    }
    if (alpha == 0.0) {
        return pseudo_inverse(B);
    }
    const Eigen::Index m = B.cols();
    const Eigen::MatrixXd inner =
        alpha * Eigen::MatrixXd::Identity(m, m) + B.transpose() * B;
    // inner is positive definite for alpha > 0, so its pseudoinverse is a
    // plain inverse.
    return inner.ldlt().solve(B.transpose());
}

ZwSplit decompose_zw(const Eigen::MatrixXd& history, const Eigen::VectorXd& x) {
    ZwSplit split;
    if (history.cols() == 0) {
        split.z = x;
        split.w = Eigen::VectorXd::Zero(x.size());
        return split;
    }
    if (history.rows() != x.size()) {
        throw InvalidInput("decompose_zw: dimension mismatch");
    }
    split.w = range_projector(history) * x;
    split.z = x - split.w;
    return split;
}

DgrRegulator::DgrRegulator(Eigen::MatrixXd B, double alpha,
                           const Eigen::VectorXd& x0)
    : B_(std::move(B)), alpha_(alpha) {
    if (B_.rows() != x0.size()) {
        throw InvalidInput("DgrRegulator: B rows must match state dimension");
    }
    G_ = regularized_input_pinv(B_, alpha_);
    X_ = x0;
    Y_.resize(B_.rows(), 0);
    K_ = Eigen::MatrixXd::Zero(B_.cols(), B_.rows());
    x_last_ = x0;
    u_last_ = Eigen::VectorXd::Zero(B_.cols());
}

Eigen::VectorXd DgrRegulator::step(const Eigen::VectorXd& x_next) {
    if (x_next.size() != B_.rows()) {
        throw InvalidInput("DgrRegulator::step: state dimension mismatch");
    }
    // Recover the open-loop response of the previous state, then refit the
    // gain on all data before admitting the new state to the history.
    const Eigen::VectorXd y = x_next - B_ * u_last_;
    Y_.conservativeResize(Eigen::NoChange, Y_.cols() + 1);
    Y_.col(Y_.cols() - 1) = y;

    K_ = G_ * (Y_ * pseudo_inverse(X_));

    X_.conservativeResize(Eigen::NoChange, X_.cols() + 1);
    X_.col(X_.cols() - 1) = x_next;

    ++t_;
    x_last_ = x_next;
    u_last_ = -K_ * x_next;
    return u_last_;
}

Eigen::Index DgrRegulator::data_rank() const { return numerical_rank(X_); }

Eigen::MatrixXd DgrRegulator::identified_dynamics() const {
    if (t_ == 0) {
        throw InsufficientData("DgrRegulator: no steps taken yet");
    }
    // The newest state has no recorded response yet, so drop it.
    return Y_ * pseudo_inverse(X_.leftCols(X_.cols() - 1));
}

FdgrRegulator::FdgrRegulator(Eigen::MatrixXd B, double alpha,
                             const Eigen::VectorXd& x0, const Eigen::VectorXd& x1)
    : B_(std::move(B)), alpha_(alpha) {
    if (B_.rows() != x0.size() || x1.size() != x0.size()) {
        throw InvalidInput("FdgrRegulator: dimension mismatch");
    }
    const double nrm2 = x0.squaredNorm();
    if (nrm2 == 0.0) {
        throw DegenerateStart("FdgrRegulator: x0 must be nonzero");
    }
    G_ = regularized_input_pinv(B_, alpha_);
    P_ = x0 * x0.transpose() / nrm2;
    Q_ = x1 * x0.transpose() / nrm2;
    K_ = G_ * Q_;
    Xpinv_ = x0.transpose() / nrm2;
    x_last_ = x1;
    u_last_ = -K_ * x1;
    t_ = 1;
}

Eigen::VectorXd FdgrRegulator::step(const Eigen::VectorXd& x_next) {
    if (x_next.size() != B_.rows()) {
        throw InvalidInput("FdgrRegulator::step: state dimension mismatch");
    }
    const Eigen::VectorXd y = x_next - B_ * u_last_;

    // One branch decision shared by the projector, the estimate, and the
    // incrementally maintained pseudoinverse.
    PinvAppendResult up = append_column_pinv(Xpinv_, P_, x_last_);
    if (!up.in_range) {
        const Eigen::RowVectorXd zdag =
            up.residual.transpose() / up.residual.squaredNorm();
        Q_ += (y - Q_ * x_last_) * zdag;
        P_ += up.residual * zdag;
    }
    Xpinv_ = std::move(up.pinv);

    K_ = G_ * Q_;
    ++t_;
    x_last_ = x_next;
    u_last_ = -K_ * x_next;
    return u_last_;
}

}  // namespace dgr
