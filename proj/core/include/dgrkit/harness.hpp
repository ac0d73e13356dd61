#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dgrkit/sysmodel.hpp"

namespace dgr {

enum class ControllerKind { None, Dgr, Fdgr, LqrKnown, DgrThenLqr };

std::string controller_name(ControllerKind kind);
ControllerKind controller_from_name(const std::string& name);

// One closed-loop experiment: perturb the plant, draw an initial state,
// run the selected controller for a fixed horizon, log everything.
struct ScenarioConfig {
    LtiSystem system;
    double perturb_std = 0.0;
    double noise_std = 0.0;
    std::optional<Eigen::VectorXd> x0;  // fixed initial state...
    double x0_std = 10.0;               // ...or Gaussian with this std
    ControllerKind controller = ControllerKind::Dgr;
    double alpha = 0.0;
    int switch_step = 0;  // earliest handover step for DgrThenLqr
    int steps = 30;
    std::uint64_t seed = 0;
    std::optional<Eigen::MatrixXd> lqr_Q;  // default identity
    std::optional<Eigen::MatrixXd> lqr_R;  // default identity

    void validate() const;
};

struct TrajectoryRow {
    int t = 0;
    Eigen::VectorXd x;
    Eigen::VectorXd u;  // input applied at t (planned input on the final row)
    double norm_x = 0.0;
    double norm_z = 0.0;  // novel component against the state history
    Eigen::Index rank_X = 0;
    std::optional<double> bound;  // L_t, present for the data-driven controllers
    std::string phase;
};

struct TrajectoryLog {
    std::string controller;
    Eigen::Index state_dim = 0;
    Eigen::Index input_dim = 0;
    bool overflow_truncated = false;
    std::vector<TrajectoryRow> rows;
};

struct RunSummary {
    std::string controller;
    int steps = 0;
    std::uint64_t seed = 0;
    double alpha = 0.0;
    double peak_norm = 0.0;
    double final_norm = 0.0;
    int first_full_rank_step = -1;  // -1: rank never reached n
    int bound_violations = 0;
    bool overflow_truncated = false;
    int switch_step = -1;  // actual handover step, -1 if none happened
    bool dare_failed = false;
    double identification_error = std::numeric_limits<double>::quiet_NaN();
    double rho_closed_loop = std::numeric_limits<double>::quiet_NaN();
};

struct ScenarioResult {
    TrajectoryLog log;
    RunSummary summary;
};

// Deterministic per seed: identical configs produce bit-identical logs.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Per-log statistics for side-by-side comparison. All logs must share the
// horizon; throws InvalidInput otherwise.
std::vector<RunSummary> compare_report(const std::vector<TrajectoryLog>& logs);

}  // namespace dgr
