#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "dgrkit/sysmodel.hpp"

namespace dgr {

// Spectral-radius tolerance at the stability boundary: a value within
// kStabilityMargin of 1 is treated as marginal, not stable.
inline constexpr double kStabilityMargin = 1e-9;

// Orthogonal split of A against the input range: atilde is the component
// the input can never touch, btilde the component it can cancel.
// atilde + btilde == A and their actions are mutually orthogonal.
Eigen::MatrixXd atilde(const LtiSystem& sys);
Eigen::MatrixXd btilde(const LtiSystem& sys);

struct SpectralVerdict {
    bool verdict = false;
    double value = 0.0;  // rho(atilde) or ||atilde|| depending on the test
};

// Regularizable: atilde is Schur stable, i.e. the input-orthogonal part of
// the dynamics dies out on its own.
SpectralVerdict is_regularizable(const LtiSystem& sys);

// Contractible: some gain K achieves ||A - B K|| < 1. The minimum of
// ||A - B K|| over K equals ||atilde||, attained at K = B^+ A.
SpectralVerdict is_contractible(const LtiSystem& sys);

// Rank of the PBH pencil at one eigenvalue.
struct PbhModeRank {
    std::complex<double> eigenvalue;
    Eigen::Index rank = 0;
    bool deficient = false;  // rank < n
};

// rank([A - lambda I, B]) at every eigenvalue of A.
std::vector<PbhModeRank> pbh_mode_ranks(const Eigen::MatrixXd& A,
                                        const Eigen::MatrixXd& B);

// rank([A - lambda I; C]) at every eigenvalue of A.
std::vector<PbhModeRank> pbh_mode_ranks_stacked(const Eigen::MatrixXd& A,
                                                const Eigen::MatrixXd& C);

// Full PBH rank at every eigenvalue with |lambda| >= 1 - kStabilityMargin.
bool pbh_stabilizable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
bool pbh_detectable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C);

// The four witness shapes accepted by verify_lmi_witness. All certify the
// same property; they differ in which auxiliary matrices appear.
enum class WitnessKind {
    Lyapunov,  // P > 0 with atilde^T P atilde - P < 0
    SchurW,    // W > 0 with [[W, atilde W], [W atilde^T, W]] > 0
    SlackG,    // P > 0, slack G with [[P, atilde^T G^T], [G atilde, G + G^T - P]] > 0
    SlackGH,   // P > 0, slacks G, H with the two-sided multiplier block < 0
};

struct LmiWitness {
    WitnessKind kind = WitnessKind::Lyapunov;
    Eigen::MatrixXd P;  // primary symmetric matrix (the W of SchurW)
    Eigen::MatrixXd G;  // SlackG / SlackGH only
    Eigen::MatrixXd H;  // SlackGH only
};

// Lyapunov witness built by solving the discrete Lyapunov equation for
// atilde; nullopt when the system is not regularizable.
std::optional<LmiWitness> lyapunov_certificate(const LtiSystem& sys);

// Assembles the block matrix for the witness kind and checks definiteness
// by minimum/maximum eigenvalue with a relative margin of 1e-9.
// Throws InvalidWitness when matrices the kind needs are missing.
bool verify_lmi_witness(const LtiSystem& sys, const LmiWitness& w);

// Vertex-wise witness verification for a polytopic family conv{A_i}: the
// slack pair (G, H) with per-vertex P_i must satisfy the multiplier LMI
// against Pi_S, and each P_i the coupling LMI tying S to R(B)^perp. When
// all hold, every convex combination of the vertices is certified
// regularizable with the same B.
bool verify_polytopic(const std::vector<Eigen::MatrixXd>& vertices,
                      const Eigen::MatrixXd& B, const Eigen::MatrixXd& S_basis,
                      const std::vector<Eigen::MatrixXd>& P,
                      const Eigen::MatrixXd& G, const Eigen::MatrixXd& H);

struct RegularizabilityReport {
    double rho_A = 0.0;
    double rho_Atilde = 0.0;
    double atilde_norm = 0.0;
    bool regularizable = false;
    bool contractible = false;
    bool marginal = false;  // rho(atilde) within kStabilityMargin of 1
    bool stabilizable = false;
    bool detectable_transpose = false;  // detectability of (A, B^T)
    std::optional<Eigen::MatrixXd> lyapunov_P;
};

RegularizabilityReport analyze(const LtiSystem& sys);

}  // namespace dgr
