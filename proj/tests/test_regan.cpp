#include "dgrkit/regan.hpp"

#include <cmath>

#include "doctest.h"
#include "dgrkit/numkernel.hpp"
#include "support/test_support.hpp"

using namespace dgr;
using testsupport::chain_system;
using testsupport::random_matrix;

namespace {

LtiSystem lemma_counterexample() {
    // Schur-stable A whose input-orthogonal part is badly unstable.
    LtiSystem sys;
    sys.A.resize(2, 2);
    sys.A << 0.9, 10.0, 0.0, 0.0;
    sys.B = Eigen::MatrixXd::Ones(2, 1);
    return sys;
}

}  // namespace

TEST_CASE("atilde and btilde") {
    SUBCASE("chain system loses its input row") {
        const LtiSystem sys = chain_system(3, 2.0, 0.1, 1.0, 2);
        const Eigen::MatrixXd At = atilde(sys);
        CHECK(At.row(2).norm() <= 1e-14);
        CHECK((At.topRows(2) - sys.A.topRows(2)).norm() <= 1e-14);
        CHECK(spectral_radius(At) == doctest::Approx(2.0).epsilon(1e-12));
    }
    SUBCASE("ones input reproduces the reflected half-split") {
        const LtiSystem sys = lemma_counterexample();
        Eigen::MatrixXd expected(2, 2);
        expected << 0.45, 5.0, -0.45, -5.0;
        CHECK((atilde(sys) - expected).norm() <= 1e-12);
    }
    SUBCASE("full-range input kills atilde") {
        Rng rng(3);
        LtiSystem sys{random_matrix(rng, 4, 4), Eigen::MatrixXd::Identity(4, 4)};
        CHECK(atilde(sys).norm() <= 1e-12);
        CHECK((btilde(sys) - sys.A).norm() <= 1e-12);
    }
    SUBCASE("zero input matrix") {
        Rng rng(4);
        LtiSystem sys{random_matrix(rng, 3, 3), Eigen::MatrixXd::Zero(3, 1)};
        CHECK(btilde(sys).norm() == 0.0);
        CHECK((atilde(sys) - sys.A).norm() == 0.0);
    }
    SUBCASE("axis input keeps only the first row") {
        LtiSystem sys{Eigen::Vector2d(2.0, 0.5).asDiagonal(),
                      Eigen::MatrixXd::Zero(2, 1)};
        sys.B(0, 0) = 1.0;
        Eigen::MatrixXd expected(2, 2);
        expected << 2.0, 0.0, 0.0, 0.0;
        CHECK((btilde(sys) - expected).norm() <= 1e-14);
    }
    SUBCASE("split laws on random systems") {
        Rng rng(9);
        for (int trial = 0; trial < 50; ++trial) {
            const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 6);
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % n);
            LtiSystem sys{random_matrix(rng, n, n), random_matrix(rng, n, m)};
            const Eigen::MatrixXd At = atilde(sys), Bt = btilde(sys);
            CHECK((At + Bt - sys.A).cwiseAbs().maxCoeff() <= 1e-12);
            const Eigen::VectorXd x = testsupport::random_vector(rng, n);
            const Eigen::VectorXd y = testsupport::random_vector(rng, n);
            const double ip = std::abs((At * x).dot(Bt * y));
            CHECK(ip <= 1e-10 * (At * x).norm() * (Bt * y).norm() + 1e-12);
        }
    }
}

TEST_CASE("regularizable versus controllable") {
    const int n = 4;
    SUBCASE("controllable but not regularizable") {
        const LtiSystem sys = chain_system(n, 2.0, 0.1, 1.0, n - 1);
        CHECK(pbh_stabilizable(sys.A, sys.B));
        const auto [flag, rho] = is_regularizable(sys);
        CHECK_FALSE(flag);
        CHECK(rho == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("regularizable but not controllable") {
        const LtiSystem sys = chain_system(n, 2.0, 0.1, 1.0, 0);
        const auto [flag, rho] = is_regularizable(sys);
        CHECK(flag);
        CHECK(rho == doctest::Approx(0.1).epsilon(1e-6));
        // rank deficiency sits at the stable eigenvalue cluster
        bool deficient_stable = false, deficient_unstable = false;
        for (const auto& mode : pbh_mode_ranks(sys.A, sys.B)) {
            if (!mode.deficient) continue;
            (std::abs(mode.eigenvalue) < 1.0 ? deficient_stable : deficient_unstable) =
                true;
        }
        CHECK(deficient_stable);
        CHECK_FALSE(deficient_unstable);
    }
    SUBCASE("contraction stays regularizable under any input") {
        Rng rng(17);
        LtiSystem sys{0.5 * Eigen::MatrixXd::Identity(3, 3), random_matrix(rng, 3, 2)};
        CHECK(is_regularizable(sys).verdict);
    }
}

TEST_CASE("is_contractible") {
    SUBCASE("stable system with no input") {
        LtiSystem sys{0.5 * Eigen::MatrixXd::Identity(2, 2),
                      Eigen::MatrixXd::Zero(2, 1)};
        const auto [flag, norm] = is_contractible(sys);
        CHECK(flag);
        CHECK(norm == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("reflected half-split is expansive") {
        const auto [flag, norm] = is_contractible(lemma_counterexample());
        CHECK_FALSE(flag);
        CHECK(norm >= 4.55);
    }
    SUBCASE("full-range input contracts everything") {
        Rng rng(21);
        LtiSystem sys{random_matrix(rng, 3, 3), Eigen::MatrixXd::Identity(3, 3)};
        const auto [flag, norm] = is_contractible(sys);
        CHECK(flag);
        CHECK(norm <= 1e-12);
    }
}

TEST_CASE("pbh tests") {
    SUBCASE("chain pair is controllable hence stabilizable") {
        const LtiSystem sys = chain_system(4, 2.0, 0.0, 1.0, 3);
        CHECK(pbh_stabilizable(sys.A, sys.B));
    }
    SUBCASE("scalar unstable with no input") {
        Eigen::MatrixXd A(1, 1), B(1, 1);
        A << 2.0;
        B << 0.0;
        CHECK_FALSE(pbh_stabilizable(A, B));
    }
    SUBCASE("stable system is vacuously stabilizable") {
        CHECK(pbh_stabilizable(0.5 * Eigen::MatrixXd::Identity(3, 3),
                               Eigen::MatrixXd::Zero(3, 1)));
    }
    SUBCASE("unstable mode hidden from the transposed input") {
        const LtiSystem sys = chain_system(4, 2.0, 0.1, 1.0, 3);
        CHECK_FALSE(pbh_detectable(sys.A, sys.B.transpose()));
    }
    SUBCASE("stable system is vacuously detectable") {
        CHECK(pbh_detectable(0.5 * Eigen::MatrixXd::Identity(3, 3),
                             Eigen::MatrixXd::Zero(1, 3)));
    }
    SUBCASE("unstable mode visible through the probe") {
        Eigen::MatrixXd C(1, 2);
        C << 1.0, 0.0;
        CHECK(pbh_detectable(Eigen::Vector2d(2.0, 0.5).asDiagonal(), C));
    }
}

TEST_CASE("lyapunov_certificate") {
    SUBCASE("full-range input gives the identity certificate") {
        Rng rng(2);
        LtiSystem sys{random_matrix(rng, 3, 3), Eigen::MatrixXd::Identity(3, 3)};
        const auto w = lyapunov_certificate(sys);
        REQUIRE(w.has_value());
        CHECK((w->P - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);
    }
    SUBCASE("infeasible for the unstable chain") {
        CHECK_FALSE(lyapunov_certificate(chain_system(3, 2.0, 0.1, 1.0, 2)).has_value());
    }
    SUBCASE("scalar contraction matches the geometric series") {
        LtiSystem sys{0.5 * Eigen::MatrixXd::Identity(2, 2),
                      Eigen::MatrixXd::Zero(2, 1)};
        const auto w = lyapunov_certificate(sys);
        REQUIRE(w.has_value());
        CHECK(w->P(0, 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-10));
    }
}

TEST_CASE("verify_lmi_witness") {
    Rng rng(23);
    const LtiSystem sys = testsupport::random_regularizable(rng, 4, 2, 0.85, 1.2);
    const auto cert = lyapunov_certificate(sys);
    REQUIRE(cert.has_value());

    SUBCASE("certificate verifies its own kind") {
        CHECK(verify_lmi_witness(sys, *cert));
    }
    SUBCASE("inverse certificate verifies the Schur form") {
        LmiWitness w;
        w.kind = WitnessKind::SchurW;
        w.P = cert->P.inverse();
        w.P = 0.5 * (w.P + w.P.transpose());
        CHECK(verify_lmi_witness(sys, w));
    }
    SUBCASE("certificate doubles as its own slack multiplier") {
        LmiWitness w;
        w.kind = WitnessKind::SlackG;
        w.P = cert->P;
        w.G = cert->P;
        CHECK(verify_lmi_witness(sys, w));
    }
    SUBCASE("identity fails on a non-regularizable pair") {
        const LtiSystem bad = chain_system(2, 2.0, 0.1, 1.0, 1);
        LmiWitness w;
        w.kind = WitnessKind::Lyapunov;
        w.P = Eigen::MatrixXd::Identity(2, 2);
        CHECK_FALSE(verify_lmi_witness(bad, w));
    }
    SUBCASE("missing slack matrices are rejected") {
        LmiWitness w;
        w.kind = WitnessKind::SlackG;
        w.P = cert->P;
        CHECK_THROWS_AS(verify_lmi_witness(sys, w), InvalidWitness);
    }
    SUBCASE("asymmetric primary matrix is rejected") {
        LmiWitness w;
        w.kind = WitnessKind::Lyapunov;
        w.P = random_matrix(rng, 4, 4);
        CHECK_THROWS_AS(verify_lmi_witness(sys, w), InvalidWitness);
    }
}

TEST_CASE("verify_polytopic") {
    // n = 2, input along the first axis, no dynamics: the two-slack witness
    // (P, G, H) = (I, 0.01 I, I) passes the single-matrix check, and the
    // single-vertex polytopic check with S = R(B)^perp must agree.
    LtiSystem sys;
    sys.A = Eigen::MatrixXd::Zero(2, 2);
    sys.B = Eigen::MatrixXd::Zero(2, 1);
    sys.B(0, 0) = 1.0;

    const Eigen::MatrixXd P = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd G = 0.01 * Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd H = Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd S_basis = Eigen::MatrixXd::Zero(2, 1);
    S_basis(1, 0) = 1.0;  // R(B)^perp

    SUBCASE("single vertex agrees with the single-matrix witness") {
        LmiWitness w;
        w.kind = WitnessKind::SlackGH;
        w.P = P;
        w.G = G;
        w.H = H;
        REQUIRE(verify_lmi_witness(sys, w));
        CHECK(verify_polytopic({sys.A}, sys.B, S_basis, {P}, G, H));
    }
    SUBCASE("zero slacks fail on an unstable vertex") {
        Eigen::MatrixXd A_bad(2, 2);
        A_bad << 0.0, 0.0, 0.0, 2.0;
        CHECK_FALSE(verify_polytopic({A_bad}, sys.B, S_basis, {P},
                                     Eigen::MatrixXd::Zero(2, 2),
                                     Eigen::MatrixXd::Zero(2, 2)));
    }
    SUBCASE("coupling holds with equality when S matches the input complement") {
        // the coupling block is only semidefinite here; the margin must
        // accept the boundary
        CHECK(verify_polytopic({sys.A, 0.1 * Eigen::MatrixXd::Identity(2, 2)},
                               sys.B, S_basis, {P, P}, G, H));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(verify_polytopic({sys.A}, sys.B, S_basis, {P, P}, G, H),
                        InvalidInput);
    }
}

TEST_CASE("eigenpair inheritance under the input-orthogonal split") {
    Rng rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 4);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % (n - 1));
        // orthogonal eigenbasis, input spanned by a subset of eigenvectors
        const Eigen::MatrixXd U = testsupport::random_orthogonal(rng, n);
        Eigen::VectorXd lambdas(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            lambdas(i) = -1.2 + 2.4 * static_cast<double>(i) / (n - 1);
        }
        LtiSystem sys;
        sys.A = U * lambdas.asDiagonal() * U.transpose();
        sys.B = U.leftCols(m);
        const Eigen::MatrixXd At = atilde(sys);
        const Eigen::MatrixXd proj = range_projector(sys.B);

        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::VectorXd v = U.col(i);
            const double lambda = lambdas(i);
            if ((proj * v).norm() <= 1e-10) {
                // eigenvector orthogonal to the input range is inherited
                CHECK((At * v - lambda * v).norm() <=
                      1e-8 * std::max(1.0, std::abs(lambda)));
            }
            if (i < m) {
                // eigenvector inside the input range collapses to zero
                CHECK((At * v).norm() <= 1e-8 * (sys.A * v).norm() + 1e-10);
            }
        }
    }
}

TEST_CASE("regularizability implies stabilizability and transposed detectability") {
    Rng rng(59);
    int regularizable_count = 0, contractible_count = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 7);
        const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % n);
        std::uniform_real_distribution<double> scale(0.1, 1.6);
        LtiSystem sys{scale(rng) * random_matrix(rng, n, n) / std::sqrt(double(n)),
                      random_matrix(rng, n, m)};
        const auto reg = is_regularizable(sys);
        const auto con = is_contractible(sys);
        if (con.verdict) {
            ++contractible_count;
            CHECK(reg.value <= con.value + 1e-12);  // rho <= operator norm
            CHECK(reg.verdict);
        }
        if (reg.verdict) {
            ++regularizable_count;
            CHECK(pbh_stabilizable(sys.A, sys.B));
            CHECK(pbh_detectable(sys.A, sys.B.transpose()));
        }
    }
    // the ensemble must actually exercise both implications
    CHECK(regularizable_count > 50);
    CHECK(contractible_count > 10);
}

TEST_CASE("enlarging the input range never grows the residual norm") {
    Rng rng(67);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng() % 4);
        const Eigen::MatrixXd A = random_matrix(rng, n, n);
        const Eigen::Index m1 = 1 + static_cast<Eigen::Index>(rng() % (n - 1));
        const Eigen::MatrixXd B_small = random_matrix(rng, n, m1);
        Eigen::MatrixXd B_large(n, m1 + 1);
        B_large.leftCols(m1) = B_small;
        B_large.col(m1) = testsupport::random_vector(rng, n);
        const double small_norm = operator_norm(atilde({A, B_small}));
        const double large_norm = operator_norm(atilde({A, B_large}));
        CHECK(large_norm <= small_norm + 1e-10);
    }
}

TEST_CASE("analyze assembles a consistent report") {
    const LtiSystem sys = lemma_counterexample();
    const RegularizabilityReport rep = analyze(sys);
    CHECK(rep.rho_A == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(rep.rho_Atilde == doctest::Approx(4.55).epsilon(1e-6));
    CHECK_FALSE(rep.regularizable);
    CHECK_FALSE(rep.contractible);
    CHECK(rep.stabilizable);
    CHECK(rep.detectable_transpose);
    CHECK_FALSE(rep.lyapunov_P.has_value());

    Rng rng(71);
    const LtiSystem good = testsupport::random_regularizable(rng, 5, 2, 0.8, 1.1);
    const RegularizabilityReport rep2 = analyze(good);
    CHECK(rep2.regularizable);
    REQUIRE(rep2.lyapunov_P.has_value());
    const Eigen::MatrixXd At = atilde(good);
    const Eigen::MatrixXd& P = *rep2.lyapunov_P;
    CHECK((At.transpose() * P * At - P + Eigen::MatrixXd::Identity(5, 5)).norm() <=
          1e-8 * std::max(1.0, P.norm()));
}
