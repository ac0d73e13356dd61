#pragma once

#include <string>

#include "dgrkit/bounds.hpp"
#include "dgrkit/harness.hpp"
#include "dgrkit/regan.hpp"
#include "dgrkit/sysmodel.hpp"

namespace dgr {

// --- logging -------------------------------------------------------------

// Level parsed once from the DGRKIT_LOG environment variable
// (error | info | debug, default error).
enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

LogLevel log_level();
void log_info(const std::string& message);
void log_debug(const std::string& message);

// --- file formats ----------------------------------------------------------

// System file: JSON with nested arrays
//   {"A": [[...], ...], "B": [[...], ...], "noise_std": 0.0, "labels": [...]}
// noise_std and labels are optional. Structural problems throw ParseError
// with a line/column diagnostic where the input text provides one.
LtiSystem parse_system_json(const std::string& text);
LtiSystem load_system_file(const std::string& path);

// Scenario file: JSON object with keys
//   system (inline object) | system_file (path), controller, steps, seed,
//   alpha, noise_std, perturb_std, x0 | x0_std, switch_step, lqr_Q, lqr_R.
// Unknown keys are rejected.
ScenarioConfig parse_scenario_json(const std::string& text,
                                   const std::string& base_dir = ".");
ScenarioConfig load_scenario_file(const std::string& path);

// --- serialization -----------------------------------------------------

// Doubles are rendered with 17 significant digits so every emitted number
// parses back to the identical value.
std::string format_double(double value);

// Trajectory CSV, header
//   t,x_1..x_n,u_1..u_m,norm_x,norm_z,rank_X,bound,phase
// with the bound cell left empty where no bound applies.
std::string to_csv(const TrajectoryLog& log);
TrajectoryLog trajectory_from_csv(const std::string& text);

std::string to_json(const RegularizabilityReport& report);
std::string to_json(const RunSummary& summary);
std::string to_json(const InstabilityEstimate& estimate);

// Bounds CSV, header t,M_lower,M_upper,L: analytic squared instability
// bounds per order, plus the realized trajectory bound when a trajectory
// is supplied (its states are re-split into novel/spanned components).
std::string bounds_csv(const LtiSystem& sys, int max_order, double alpha,
                       const TrajectoryLog* trajectory = nullptr);

}  // namespace dgr
