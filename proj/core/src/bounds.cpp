#include "dgrkit/bounds.hpp"

#include <cmath>

#include "dgrkit/numkernel.hpp"
#include "dgrkit/regan.hpp"
#include "dgrkit/regulator.hpp"

namespace dgr {

namespace {

double binomial(int n, int k) {
    double value = 1.0;
    for (int i = 1; i <= k; ++i) {
        value *= static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return value;
}

void check_order(const Eigen::MatrixXd& A, int order) {
    if (A.rows() != A.cols()) {
        throw InvalidInput("instability bounds: matrix must be square");
    }
    if (order < 1 || order > A.rows()) {
        throw InvalidOrder("instability bounds: order must be in 1..n");
    }
}

}  // namespace

InstabilityBoundPair instability_bounds(const Eigen::MatrixXd& A, int order) {
    check_order(A, order);
    const Eigen::VectorXd sv = svd(A).singular_values;
    const double s1sq = sv(0) * sv(0);
    double delta = 0.0;
    for (int i = 2; i <= order; ++i) {
        delta += sv(i - 1) * sv(i - 1);
    }

    InstabilityBoundPair out;
    out.lower = std::pow(s1sq / order, order);
    out.upper = out.lower;
    for (int j = 1; j <= order - 1; ++j) {
        out.upper += std::pow(s1sq / (order - j), order - j) * binomial(order, j) *
                     std::pow(delta, j);
    }
    out.upper += std::pow(delta, order);
    return out;
}

namespace {

double frame_objective(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V) {
    double value = 1.0;
    for (Eigen::Index i = 0; i < V.cols(); ++i) {
        value *= (A * V.col(i)).norm();
    }
    return value;
}

// Orthonormal basis of the orthogonal complement of the given columns.
Eigen::MatrixXd complement_basis(const Eigen::MatrixXd& cols, Eigen::Index n) {
    if (cols.cols() == 0) {
        return Eigen::MatrixXd::Identity(n, n);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(cols);
    const Eigen::MatrixXd Qfull = qr.householderQ();
    return Qfull.rightCols(n - cols.cols());
}

// Best-response sweep: each column in turn is replaced by the direction of
// largest gain inside the complement of the others, which can only raise
// the product. Stops on relative gain below 1e-10 or after 500 sweeps.
double ascend(const Eigen::MatrixXd& A, Eigen::MatrixXd& V) {
    const Eigen::Index n = A.rows();
    const Eigen::Index t = V.cols();
    double value = frame_objective(A, V);
    for (int sweep = 0; sweep < 500; ++sweep) {
        for (Eigen::Index i = 0; i < t; ++i) {
            Eigen::MatrixXd others(n, t - 1);
            Eigen::Index at = 0;
            for (Eigen::Index j = 0; j < t; ++j) {
                if (j != i) others.col(at++) = V.col(j);
            }
            const Eigen::MatrixXd C = complement_basis(others, n);
            Eigen::JacobiSVD<Eigen::MatrixXd> dec(A * C, Eigen::ComputeThinV);
            V.col(i) = C * dec.matrixV().col(0);
        }
        const double next = frame_objective(A, V);
        if (next <= value * (1.0 + 1e-10)) {
            value = std::max(value, next);
            break;
        }
        value = next;
    }
    return value;
}

// Frame whose members all meet the top right-singular direction at the
// equal angle |<u1, v_i>| = 1/sqrt(t); its product is at least
// (sigma_1/sqrt(t))^t, which certifies the analytic lower bound.
Eigen::MatrixXd spread_frame(const Eigen::MatrixXd& A, int t) {
    const Eigen::Index n = A.rows();
    const Eigen::VectorXd u1 = svd(A).V.col(0);

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(u1);
    Eigen::MatrixXd basis = Eigen::MatrixXd(qr.householderQ()).leftCols(t);

    if (t == 1) return basis;

    const double c = 1.0 / std::sqrt(static_cast<double>(t));
    Eigen::VectorXd target = Eigen::VectorXd::Constant(t, c);
    Eigen::VectorXd v = Eigen::VectorXd::Unit(t, 0) - target;
    Eigen::MatrixXd reflector = Eigen::MatrixXd::Identity(t, t);
    if (v.squaredNorm() > 0.0) {
        reflector -= 2.0 * (v * v.transpose()) / v.squaredNorm();
    }
    return basis * reflector;
}

Eigen::MatrixXd random_frame(Eigen::Index n, int t, Rng& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd raw(n, t);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (int j = 0; j < t; ++j) raw(i, j) = gauss(rng);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
    return Eigen::MatrixXd(qr.householderQ()).leftCols(t);
}

}  // namespace

InstabilityEstimate estimate_instability(const Eigen::MatrixXd& A, int order,
                                         int restarts, std::uint64_t seed) {
    check_order(A, order);
    if (restarts < 1) {
        throw InvalidInput("estimate_instability: restarts must be >= 1");
    }
    const InstabilityBoundPair pair = instability_bounds(A, order);

    InstabilityEstimate best;
    best.order = order;
    best.analytic_lower = pair.lower;
    best.analytic_upper = pair.upper;
    best.value = -1.0;

    for (int k = 0; k < restarts; ++k) {
        Eigen::MatrixXd V;
        if (k == 0) {
            V = spread_frame(A, order);
        } else {
            Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
            V = random_frame(A.rows(), order, rng);
        }
        const double value = ascend(A, V);
        if (value > best.value) {
            best.value = value;
            best.frame = V;
        }
    }
    return best;
}

Eigen::MatrixXd input_mismatch(const LtiSystem& sys, double alpha) {
    sys.validate();
    const Eigen::MatrixXd gap =
        pseudo_inverse(sys.B) - regularized_input_pinv(sys.B, alpha);
    return sys.B * gap * sys.A;
}

RealizedDirections realized_directions(const std::vector<Eigen::VectorXd>& states) {
    if (states.empty()) {
        throw InvalidInput("realized_directions: no states");
    }
    const Eigen::Index n = states.front().size();
    RealizedDirections dirs;
    dirs.zbar.reserve(states.size());
    dirs.wbar.reserve(states.size());
    Eigen::MatrixXd history(n, 0);
    for (const auto& x : states) {
        if (x.size() != n) {
            throw InvalidInput("realized_directions: inconsistent state dimension");
        }
        const ZwSplit split = decompose_zw(history, x);
        const double tau = residual_threshold(x);
        dirs.zbar.push_back(split.z.norm() > tau ? Eigen::VectorXd(split.z.normalized())
                                                 : Eigen::VectorXd::Zero(n));
        dirs.wbar.push_back(split.w.norm() > tau ? Eigen::VectorXd(split.w.normalized())
                                                 : Eigen::VectorXd::Zero(n));
        history.conservativeResize(Eigen::NoChange, history.cols() + 1);
        history.col(history.cols() - 1) = x;
    }
    return dirs;
}

BoundSeries trajectory_bound_series(const LtiSystem& sys, double alpha,
                                    const std::vector<Eigen::VectorXd>& zbar,
                                    const std::vector<Eigen::VectorXd>& wbar) {
    sys.validate();
    const std::size_t T = zbar.size();
    if (T == 0 || wbar.size() != T) {
        throw InvalidInput("trajectory_bound_series: misaligned sequences");
    }
    const Eigen::Index n = sys.state_dim();
    auto check_unit_or_zero = [n](const Eigen::VectorXd& v, const char* name) {
        if (v.size() != n) {
            throw InvalidInput(std::string("trajectory_bound_series: ") + name +
                               " dimension mismatch");
        }
        const double nrm = v.norm();
        if (nrm != 0.0 && std::abs(nrm - 1.0) > 1e-8) {
            throw InvalidInput(std::string("trajectory_bound_series: ") + name +
                               " entries must be unit vectors or zero");
        }
    };
    for (const auto& v : zbar) check_unit_or_zero(v, "zbar");
    for (const auto& v : wbar) check_unit_or_zero(v, "wbar");
    if (zbar[0].norm() == 0.0) {
        throw InvalidInput("trajectory_bound_series: zbar[0] must be x0/||x0||");
    }

    const Eigen::MatrixXd At = atilde(sys);
    const Eigen::MatrixXd Bt = btilde(sys);
    const Eigen::MatrixXd D = input_mismatch(sys, alpha);

    BoundSeries series;
    series.alpha = alpha;

    series.a.resize(T);
    Eigen::VectorXd head = sys.A * zbar[0];
    series.a[0] = head.norm();
    for (std::size_t t = 1; t < T; ++t) {
        head = At * head;
        series.a[t] = head.norm();
    }

    // b[t][r-1] built by repeated application of atilde to the two channel
    // seeds, O(T^2) matrix-vector products in total.
    series.b.resize(T);
    for (std::size_t t = 1; t < T; ++t) series.b[t].resize(t);
    for (std::size_t r = 1; r < T; ++r) {
        Eigen::VectorXd p = Bt * zbar[r];
        Eigen::VectorXd q = D * wbar[r];
        for (std::size_t t = r; t < T; ++t) {
            series.b[t][r - 1] = std::hypot(p.norm(), q.norm());
            p = At * p;
            q = At * q;
        }
    }

    series.L.resize(T + 1);
    series.L[0] = 1.0;
    series.L[1] = series.a[0];
    for (std::size_t t = 1; t < T; ++t) {
        double sum = series.a[t];
        for (std::size_t r = 1; r <= t; ++r) {
            sum += series.b[t][r - 1] * series.L[r];
        }
        series.L[t + 1] = sum;
    }
    return series;
}

double m_based_bound(const LtiSystem& sys, int order, bool use_special) {
    sys.validate();
    const Eigen::Index n = sys.state_dim();
    if (order < 1) {
        throw InvalidOrder("m_based_bound: order must be >= 1");
    }
    const Eigen::MatrixXd At = atilde(sys);
    const double a_norm = operator_norm(sys.A);

    if (use_special) {
        if (operator_norm(At) > 1e-10 * std::max(1.0, a_norm)) {
            throw BoundNotApplicable(
                "m_based_bound: range of A is not inside range of B");
        }
        if (order > n) {
            throw InvalidOrder("m_based_bound: order must be <= n");
        }
        return std::sqrt(instability_bounds(sys.A, order).upper);
    }

    const Eigen::MatrixXd Bt = btilde(sys);
    if (operator_norm(At * Bt) > 1e-10 * a_norm * a_norm) {
        throw BoundNotApplicable("m_based_bound: atilde * btilde must vanish");
    }
    if (order + 1 > n) {
        throw InvalidOrder("m_based_bound: order + 1 must be <= n");
    }

    // Trajectory terms replaced by their operator-norm envelopes; every
    // instability number by its certified analytic upper bound.
    std::vector<double> m_hat(static_cast<std::size_t>(order) + 2);
    for (int r = 1; r <= order + 1; ++r) {
        m_hat[static_cast<std::size_t>(r)] =
            std::sqrt(instability_bounds(sys.A, r).upper);
    }
    std::vector<double> a_env(static_cast<std::size_t>(order) + 1);
    Eigen::MatrixXd power = At;
    for (int k = 1; k <= order; ++k) {
        a_env[static_cast<std::size_t>(k)] = operator_norm(power * sys.A);
        power = At * power;
    }

    double bound = m_hat[static_cast<std::size_t>(order) + 1] +
                   a_env[static_cast<std::size_t>(order)];
    for (int r = 1; r <= order - 1; ++r) {
        bound += m_hat[static_cast<std::size_t>(r)] *
                 a_env[static_cast<std::size_t>(order - r)];
    }
    return bound;
}

}  // namespace dgr
