#include <doctest.h>

#include "rapidstab/errors.hpp"
#include "rapidstab/saint_venant.hpp"
#include "rapidstab/stabilizer.hpp"

#include <numbers>
#include <random>

using namespace rapidstab;
using std::numbers::pi;

namespace {
const DipolarMoment kSquare = DipolarMoment::polynomial({0, 0, 1});

SpectralState random_state(std::mt19937_64& rng, int N, int support) {
    std::normal_distribution<double> g;
    SpectralState x(N);
    for (int k = 0; k < support; ++k) {
        x.p[k] = g(rng) / std::pow(k + 1, 4);
        x.q[k] = g(rng) / std::pow(k + 1, 4);
    }
    return x;
}
}  // namespace

TEST_CASE("TB = B is solved to roundoff") {
    for (bool shifted : {false, true}) {
        Synthesis s = synthesize(kSquare, 64, 1.0, shifted);
        CHECK(s.gains.residual_rel < 1e-10);
        TransformOperator T = assemble_T(s.basis, s.gains, s.table);
        Vec b = control_vector(s.table, 3);
        CHECK((T.T * b - b).norm() / b.norm() < 1e-8);
    }
}

TEST_CASE("transform is linear and maps zero to zero") {
    Synthesis s = synthesize(kSquare, 32, 1.0);
    TransformOperator T = assemble_T(s.basis, s.gains, s.table);
    CHECK((T.T * Vec::Zero(64)).norm() == 0.0);
    CHECK((T.T * T.Tinv - Mat::Identity(64, 64)).norm() < 1e-10 * T.cond);
}

TEST_CASE("norm and conditioning are stable in N") {
    Synthesis a = synthesize(kSquare, 64, 1.0), b = synthesize(kSquare, 128, 1.0);
    TransformOperator Ta = assemble_T(a.basis, a.gains, a.table);
    TransformOperator Tb = assemble_T(b.basis, b.gains, b.table);
    CHECK(std::abs(Tb.norm - Ta.norm) / Ta.norm < 0.2);
    CHECK(Tb.cond / Ta.cond > 0.5);
    CHECK(Tb.cond / Ta.cond < 2.0);
}

TEST_CASE("low-mode gains agree between N and N/2") {
    Synthesis a = synthesize(kSquare, 64, 1.0), b = synthesize(kSquare, 128, 1.0);
    for (int n = 0; n < 128 / 8; ++n) {
        CHECK(std::abs(b.gains.alpha2[n] - a.gains.alpha2[n]) < 0.01 * std::abs(b.gains.alpha2[n]));
        CHECK(std::abs(b.gains.alpha1[n] - a.gains.alpha1[n]) <
              0.01 * std::abs(b.gains.alpha1[n]) + 1e-8 * b.gains.alpha2.head(16).cwiseAbs().maxCoeff());
    }
}

TEST_CASE("gain growth splits into a decaying part and a corrector part") {
    // Gains for n <= 128 taken from a 256-mode solve, clear of the truncation edge.
    Synthesis s = synthesize(kSquare, 256, 1.0);
    FeedbackGains tilde = tilde_gains(s.table);
    auto seg_max = [](const Vec& v, int lo, int hi) {
        double m = 0;
        for (int n = lo; n <= hi; ++n) m = std::max(m, std::abs(v[n - 1]) / std::pow(n, 3));
        return m;
    };
    auto seg_min = [](const Vec& v, int lo, int hi) {
        double m = INFINITY;
        for (int n = lo; n <= hi; ++n) m = std::min(m, std::abs(v[n - 1]) / std::pow(n, 3));
        return m;
    };
    Vec corrected = s.gains.alpha2 - tilde.alpha2;
    CHECK(seg_max(s.gains.alpha1, 97, 128) < seg_max(s.gains.alpha1, 65, 96));
    CHECK(seg_max(corrected, 97, 128) < seg_max(corrected, 65, 96));
    CHECK(seg_min(s.gains.alpha2, 65, 128) > 0.5 * seg_min(s.gains.alpha2, 33, 64));
    CHECK(seg_min(s.gains.alpha2, 65, 128) > 0);
}

TEST_CASE("Fredholm split") {
    Synthesis s = synthesize(kSquare, 128, 1.0);
    FeedbackGains tilde = tilde_gains(s.table);
    FredholmSplit self = fredholm_split(s.basis, tilde, tilde, s.table);
    CHECK(self.hs.norm() == 0.0);
    FredholmSplit f = fredholm_split(s.basis, s.gains, s.table);
    CHECK(f.tail_fraction <= 0.3);
    CHECK(std::isfinite(f.Ttilde.cond));
    CHECK(f.Ttilde.cond > 1);
}

TEST_CASE("feedback value") {
    Synthesis s = synthesize(kSquare, 16, 1.0);
    SpectralState x(16);
    x.q[3] = 1;
    CHECK(feedback_value(s.gains, x, 0.0) == s.gains.alpha2[3]);
    CHECK(feedback_value(s.gains, SpectralState(16), 1.0) == 0.0);
    FeedbackGains zero{Vec::Zero(16), Vec::Zero(16), {}, {}, 0, 0, 0};
    CHECK(feedback_value(zero, x, 0.0) == 0.0);

    FeedbackGains rot = s.gains;
    rot.rotation_omega = pi * pi;
    double period = 2 * pi / rot.rotation_omega;
    CHECK(feedback_value(rot, x, period) == doctest::Approx(feedback_value(rot, x, 0.0)).epsilon(1e-12));
    // quarter turn sends q to -p
    SpectralState y(16);
    y.p[3] = -1;
    CHECK(feedback_value(rot, x, period / 4) == doctest::Approx(static_feedback(rot, y)).epsilon(1e-12));

    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        SpectralState a = random_state(rng, 16, 16), b = random_state(rng, 16, 16);
        SpectralState c(16);
        c.p = 2 * a.p - 3 * b.p;
        c.q = 2 * a.q - 3 * b.q;
        double lhs = feedback_value(rot, c, 0.3);
        double rhs = 2 * feedback_value(rot, a, 0.3) - 3 * feedback_value(rot, b, 0.3);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("operator identity holds for the truncated system") {
    Synthesis s = synthesize(kSquare, 64, 1.0);
    TransformOperator T = assemble_T(s.basis, s.gains, s.table);
    CHECK(operator_equality_residual(T.T, s.gains, s.table, SpectralState(64)) == 0.0);
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        SpectralState x = random_state(rng, 64, 16);
        CHECK(operator_equality_residual(T.T, s.gains, s.table, x) < 1e-9);
    }
}

TEST_CASE("truncated gains approach the reference operator identity") {
    Synthesis ref = synthesize(kSquare, 256, 1.0);
    TransformOperator T = assemble_T(ref.basis, ref.gains, ref.table);
    std::mt19937_64 rng(17);
    SpectralState x = random_state(rng, 256, 8);
    double prev = INFINITY;
    for (int N : {32, 64, 128}) {
        FeedbackGains g = synthesize(kSquare, N, 1.0).gains;
        double r = operator_equality_residual(T.T, g, ref.table, x);
        CHECK(r < prev);
        prev = r;
    }
}

TEST_CASE("strict domain states zero the feedback") {
    Synthesis s = synthesize(kSquare, 32, 1.0);
    std::mt19937_64 rng(19);
    SpectralState x = random_state(rng, 32, 12);
    SpectralState y = strict_domain_state(x, s.gains);
    CHECK(std::abs(static_feedback(s.gains, y)) < 1e-10 * std::abs(static_feedback(s.gains, x)) + 1e-14);
    CHECK((y.q - x.q).norm() == 0.0);
}

TEST_CASE("near singular basis is refused") {
    Synthesis s = synthesize(kSquare, 8, 1.0);
    BasisFamily b = s.basis;
    b.G2.col(3) = b.G2.col(2);
    CHECK_THROWS_AS(solve_tb_eq_b(b, s.table), NearSingularBasis);
}

TEST_CASE("synthesis refuses moments that violate the hypothesis") {
    CHECK_THROWS_AS(synthesize(DipolarMoment::polynomial({0, 1, -1}), 32, 1.0), HypothesisViolation);
}

TEST_CASE("shifted transform leaves the first p coordinate alone") {
    Synthesis s = synthesize(kSquare, 32, 1.0, true);
    TransformOperator T = assemble_T(s.basis, s.gains, s.table);
    CHECK(T.T.col(0).norm() == 0.0);
    CHECK(s.gains.alpha1[0] == 0.0);
    CHECK(s.gains.rotation_omega == doctest::Approx(pi * pi));
}

TEST_CASE("Saint-Venant operator identity") {
    for (int n : {8, 64, 256}) CHECK(sv_operator_equality_residual(0.5, n, 400) <= 1e-10);
}
