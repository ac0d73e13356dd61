#include "dgrkit/harness.hpp"

#include <cmath>
#include <optional>

#include "dgrkit/bounds.hpp"
#include "dgrkit/numkernel.hpp"
#include "dgrkit/regan.hpp"
#include "dgrkit/regulator.hpp"

namespace dgr {

std::string controller_name(ControllerKind kind) {
    switch (kind) {
        case ControllerKind::None: return "none";
        case ControllerKind::Dgr: return "dgr";
        case ControllerKind::Fdgr: return "fdgr";
        case ControllerKind::LqrKnown: return "lqr_known";
        case ControllerKind::DgrThenLqr: return "dgr_then_lqr";
    }
    throw InvalidInput("controller_name: unknown kind");
}

ControllerKind controller_from_name(const std::string& name) {
    if (name == "none") return ControllerKind::None;
    if (name == "dgr") return ControllerKind::Dgr;
    if (name == "fdgr") return ControllerKind::Fdgr;
    if (name == "lqr_known") return ControllerKind::LqrKnown;
    if (name == "dgr_then_lqr") return ControllerKind::DgrThenLqr;
    throw InvalidInput("unknown controller name: " + name);
}

void ScenarioConfig::validate() const {
    system.validate();
    if (steps < 1) throw InvalidInput("ScenarioConfig: steps must be >= 1");
    if (!(perturb_std >= 0.0)) throw InvalidInput("ScenarioConfig: perturb_std < 0");
    if (!(noise_std >= 0.0)) throw InvalidInput("ScenarioConfig: noise_std < 0");
    if (!(alpha >= 0.0)) throw InvalidInput("ScenarioConfig: alpha < 0");
    if (x0 && x0->size() != system.state_dim()) {
        throw InvalidInput("ScenarioConfig: x0 dimension mismatch");
    }
    if (!x0 && !(x0_std > 0.0)) {
        throw InvalidInput("ScenarioConfig: x0_std must be > 0");
    }
    if (controller == ControllerKind::DgrThenLqr &&
        (switch_step < 0 || switch_step >= steps)) {
        throw InvalidInput("ScenarioConfig: switch_step must be in [0, steps)");
    }
    const Eigen::Index n = system.state_dim();
    const Eigen::Index m = system.input_dim();
    if (lqr_Q && (lqr_Q->rows() != n || lqr_Q->cols() != n)) {
        throw InvalidInput("ScenarioConfig: lqr_Q must be n x n");
    }
    if (lqr_R && (lqr_R->rows() != m || lqr_R->cols() != m)) {
        throw InvalidInput("ScenarioConfig: lqr_R must be m x m");
    }
}

namespace {

constexpr double kOverflowNorm = 1e12;

Eigen::VectorXd draw_initial_state(const ScenarioConfig& cfg) {
    if (cfg.x0) return *cfg.x0;
    Rng rng(mix_seed(cfg.seed, 2));
    std::normal_distribution<double> gauss(0.0, cfg.x0_std);
    Eigen::VectorXd x0(cfg.system.state_dim());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = gauss(rng);
    return x0;
}

// Unit-or-zero normalization with the shared residual threshold.
Eigen::VectorXd unit_or_zero(const Eigen::VectorXd& v, const Eigen::VectorXd& x) {
    const double nrm = v.norm();
    if (nrm > residual_threshold(x)) return v / nrm;
    return Eigen::VectorXd::Zero(v.size());
}

double relative_error(const Eigen::MatrixXd& est, const Eigen::MatrixXd& truth) {
    const double scale = truth.norm();
    const double err = (est - truth).norm();
    return scale > 0.0 ? err / scale : err;
}

// A state at the numerical-zero scale of the run is an exact zero of the
// recursion (the bound can be exactly 0 there), so it never counts as a
// violation.
bool bound_violated(double norm_x, double bound, double x0_norm, double peak_norm) {
    if (norm_x <= bound * x0_norm * (1.0 + 1e-8)) return false;
    return norm_x > 1e-10 * peak_norm;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    LtiSystem plant = cfg.perturb_std > 0.0
                          ? perturb(cfg.system, cfg.perturb_std, mix_seed(cfg.seed, 1))
                          : cfg.system;
    plant.noise_std = cfg.noise_std;
    const Eigen::Index n = plant.state_dim();
    const Eigen::Index m = plant.input_dim();
    const Eigen::MatrixXd Q = cfg.lqr_Q.value_or(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd R = cfg.lqr_R.value_or(Eigen::MatrixXd::Identity(m, m));

    Eigen::VectorXd x = draw_initial_state(cfg);
    Rng noise_rng(mix_seed(cfg.seed, 3));

    ScenarioResult result;
    TrajectoryLog& log = result.log;
    RunSummary& summary = result.summary;
    log.controller = controller_name(cfg.controller);
    log.state_dim = n;
    log.input_dim = m;
    summary.controller = log.controller;
    summary.steps = cfg.steps;
    summary.seed = cfg.seed;
    summary.alpha = cfg.alpha;

    std::optional<DgrRegulator> dgr;
    std::optional<FdgrRegulator> fdgr;
    Eigen::MatrixXd lqr_gain;
    bool lqr_active = false;
    bool open_loop_fallback = false;

    switch (cfg.controller) {
        case ControllerKind::Dgr:
        case ControllerKind::DgrThenLqr:
            dgr.emplace(plant.B, cfg.alpha, x);
            break;
        case ControllerKind::LqrKnown:
            try {
                const DareSolution sol = solve_dare(plant.A, plant.B, Q, R);
                lqr_gain = sol.K;
                lqr_active = true;
                summary.rho_closed_loop = spectral_radius(plant.A - plant.B * sol.K);
            } catch (const DareDiverged&) {
                summary.dare_failed = true;
                open_loop_fallback = true;
            }
            break;
        default:
            break;
    }

    Eigen::MatrixXd history(n, 0);
    std::vector<Eigen::VectorXd> zbar, wbar;
    const bool wants_bound = cfg.controller == ControllerKind::Dgr ||
                             cfg.controller == ControllerKind::Fdgr ||
                             cfg.controller == ControllerKind::DgrThenLqr;

    for (int t = 0; t <= cfg.steps; ++t) {
        if (!x.allFinite()) {
            log.overflow_truncated = true;
            break;
        }
        const bool overflow = x.norm() > kOverflowNorm;

        const ZwSplit split = decompose_zw(history, x);
        history.conservativeResize(Eigen::NoChange, history.cols() + 1);
        history.col(history.cols() - 1) = x;
        const Eigen::Index rank = numerical_rank(history);
        if (rank == n && summary.first_full_rank_step < 0) {
            summary.first_full_rank_step = t;
        }

        // Data-driven phase means DGR/F-DGR picks the input at this step.
        bool data_phase = false;
        switch (cfg.controller) {
            case ControllerKind::Dgr:
            case ControllerKind::Fdgr:
                data_phase = true;
                break;
            case ControllerKind::DgrThenLqr:
                data_phase = !lqr_active && !open_loop_fallback;
                break;
            default:
                break;
        }

        // Handover: once enough informative data exists (never before the
        // configured step), identify the plant and freeze an LQR gain on
        // the estimate.
        if (cfg.controller == ControllerKind::DgrThenLqr && data_phase &&
            t >= cfg.switch_step && rank == n && dgr->steps() >= 1) {
            const Eigen::MatrixXd a_hat = dgr->identified_dynamics();
            summary.identification_error = relative_error(a_hat, plant.A);
            summary.switch_step = t;
            try {
                const DareSolution sol = solve_dare(a_hat, plant.B, Q, R);
                lqr_gain = sol.K;
                lqr_active = true;
                summary.rho_closed_loop = spectral_radius(plant.A - plant.B * sol.K);
            } catch (const DareDiverged&) {
                summary.dare_failed = true;
                open_loop_fallback = true;
            }
            data_phase = false;
        }

        if (wants_bound && data_phase && t < cfg.steps) {
            zbar.push_back(unit_or_zero(split.z, x));
            wbar.push_back(unit_or_zero(split.w, x));
        }

        Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
        std::string phase = "open_loop";
        if (lqr_active) {
            u = -lqr_gain * x;
            phase = "lqr";
        } else if (data_phase) {
            if (cfg.controller == ControllerKind::Fdgr) {
                phase = "fdgr";
                if (fdgr) u = fdgr->current_input();  // t = 0 stays at u = 0
            } else {
                phase = "dgr";
                u = dgr->current_input();
            }
        }
        if (overflow) phase = "overflow";

        TrajectoryRow row;
        row.t = t;
        row.x = x;
        row.u = u;
        row.norm_x = x.norm();
        row.norm_z = split.z.norm();
        row.rank_X = rank;
        row.phase = phase;
        log.rows.push_back(std::move(row));

        if (overflow) {
            log.overflow_truncated = true;
            break;
        }
        if (t == cfg.steps) break;

        const Eigen::VectorXd x_next = step(plant, x, u, noise_rng);

        if (data_phase) {
            if (cfg.controller == ControllerKind::Fdgr) {
                if (!fdgr) {
                    fdgr.emplace(plant.B, cfg.alpha, x, x_next);
                } else {
                    fdgr->step(x_next);
                }
            } else {
                dgr->step(x_next);
            }
        }
        x = x_next;
    }

    if (wants_bound && !zbar.empty()) {
        const BoundSeries series = trajectory_bound_series(plant, cfg.alpha, zbar, wbar);
        const double x0_norm = log.rows.front().norm_x;
        double running_peak = 0.0;
        for (auto& row : log.rows) {
            running_peak = std::max(running_peak, row.norm_x);
            if (static_cast<std::size_t>(row.t) < series.L.size()) {
                row.bound = series.L[static_cast<std::size_t>(row.t)];
                if (bound_violated(row.norm_x, *row.bound, x0_norm, running_peak)) {
                    ++summary.bound_violations;
                }
            }
        }
    }

    if (std::isnan(summary.identification_error)) {
        if (cfg.controller == ControllerKind::Dgr && dgr && dgr->steps() >= 1) {
            summary.identification_error =
                relative_error(dgr->identified_dynamics(), plant.A);
        } else if (cfg.controller == ControllerKind::Fdgr && fdgr) {
            summary.identification_error =
                relative_error(fdgr->identified_dynamics(), plant.A);
        }
    }

    summary.overflow_truncated = log.overflow_truncated;
    summary.peak_norm = 0.0;
    for (const auto& row : log.rows) {
        summary.peak_norm = std::max(summary.peak_norm, row.norm_x);
    }
    summary.final_norm = log.rows.empty() ? 0.0 : log.rows.back().norm_x;
    return result;
}

std::vector<RunSummary> compare_report(const std::vector<TrajectoryLog>& logs) {
    if (logs.empty()) {
        throw InvalidInput("compare_report: no logs");
    }
    const std::size_t horizon = logs.front().rows.size();
    for (const auto& log : logs) {
        if (log.rows.size() != horizon || log.rows.empty()) {
            throw InvalidInput("compare_report: logs must share the horizon");
        }
    }
    std::vector<RunSummary> out;
    out.reserve(logs.size());
    for (const auto& log : logs) {
        RunSummary s;
        s.controller = log.controller;
        s.steps = log.rows.back().t;
        s.overflow_truncated = log.overflow_truncated;
        const double x0_norm = log.rows.front().norm_x;
        for (const auto& row : log.rows) {
            s.peak_norm = std::max(s.peak_norm, row.norm_x);
            if (row.rank_X == log.state_dim && s.first_full_rank_step < 0) {
                s.first_full_rank_step = row.t;
            }
            if (row.bound && bound_violated(row.norm_x, *row.bound, x0_norm, s.peak_norm)) {
                ++s.bound_violations;
            }
        }
        s.final_norm = log.rows.back().norm_x;
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace dgr
