// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include "rapidstab/basis.hpp"
#include "rapidstab/finite_dim.hpp"
#include "rapidstab/saint_venant.hpp"
#include "rapidstab/simulation.hpp"
#include "rapidstab/stabilizer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

using namespace rapidstab;

namespace {

const DipolarMoment kSquare = DipolarMoment::polynomial({0, 0, 1});
int failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, const char* name, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("[%s] C%-2d %s: %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

SpectralState unit_mode(int N, int k, char c = 'q') {
    SpectralState x(N);
    (c == 'p' ? x.p : x.q)[k - 1] = 1;
    return x;
}

void c1_finite_dim() {
    Timer tm;
    std::mt19937_64 rng(20240601);
    double eig = 0, ident = 0, tb = 0, imag = 0;
    int count = 0;
    for (double lam : {0.5, 1.0, 2.0})
        for (int i = 0; i < 50; ++i) {
            LtiSystem s = random_system(rng, 1 + i % 8, lam);
            FiniteTransform ft = finite_transform(s);
            PoleShiftReport r = verify_pole_shift(s, ft);
            eig = std::max(eig, r.eig_error);
            ident = std::max(ident, r.identity_rel);
            tb = std::max(tb, r.tb_residual);
            imag = std::max({imag, ft.imag_T, ft.imag_K});
            ++count;
        }
    double sec = tm.seconds();
    bool ok = eig <= 1e-8 && ident <= 1e-10 && tb <= 1e-10 && imag <= 1e-12 && sec < 5;
    report(1, "finite-dim pole placement", ok,
           fmt("%d systems, eig err %.2e (<=1e-8), TA+BK=(A-lam)T rel %.2e, TB=B rel %.2e (<=1e-10), "
               "imag %.2e (<=1e-12), %.2fs (<5s)",
               count, eig, ident, tb, imag, sec));
}

void c2_tb_eq_b() {
    bool ok = true;
    std::string d;
    for (int N : {64, 128}) {
        Timer tm;
        Synthesis s = synthesize(kSquare, N, 1.0);
        TransformOperator T = assemble_T(s.basis, s.gains, s.table);
        Vec b = control_vector(s.table, 3);
        double applied = (T.T * b - b).norm() / b.norm();
        double sec = tm.seconds();
        ok = ok && s.gains.residual <= 1e-10 && s.gains.residual_rel <= 1e-10 && applied <= 1e-8 &&
             (N != 128 || sec < 10);
        d += fmt("N=%d solve %.2e abs %.2e rel (<=1e-10), T b - b %.2e (<=1e-8), %.2fs; ", N,
                 s.gains.residual, s.gains.residual_rel, applied, sec);
    }
    report(2, "TB=B residual", ok, d);
}

void c3_normalization() {
    const int N = 128;
    ModeTable t = make_mode_table(kSquare, N, 1.0);
    KernelTensor kt = kernel_tensors(t);
    auto [g, h] = normalization_values(t, kt);
    double worst = 0;
    for (int n = 0; n < N; ++n)
        worst = std::max({worst, std::abs(g[n] - 1 / t.lambda[n]) * t.lambda[n],
                          std::abs(h[n] - 1 / t.lambda[n]) * t.lambda[n]});
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> idx(1, N);
    double sys = 0;
    for (int i = 0; i < 100; ++i) {
        int n = idx(rng), k = idx(rng);
        double s = t.beta1[n - 1] * t.m[k - 1];
        Eigen::Vector4d v(kt.c11(n - 1, k - 1), kt.c12(n - 1, k - 1), kt.c21(n - 1, k - 1), kt.c22(n - 1, k - 1));
        Eigen::Vector4d r = coupling_matrix(t, n, k) * (s * v) - Eigen::Vector4d(s, 0, 0, 0);
        sys = std::max(sys, r.cwiseAbs().maxCoeff());
    }
    report(3, "normalization identities", worst <= 1e-12 && sys <= 1e-10,
           fmt("lambda_n <g,phi_n> and lambda_n <h,phi_n> off by %.2e (<=1e-12), 4x4 system %.2e (<=1e-10)",
               worst, sys));
}

void c4_tails() {
    const int N = 128;
    ModeTable t = make_mode_table(kSquare, N, 1.0);
    BasisFamily b = build_basis(t, kernel_tensors(t));
    bool ok = true;
    std::string d;
    for (int s : {2, 3}) {
        TailReport r = closeness_tails(b, s);
        for (auto* S : {&r.S_g, &r.S_h}) {
            bool mono = (*S)[0] <= (*S)[1] && (*S)[1] <= (*S)[2];
            double growth = ((*S)[2] - (*S)[1]) / (*S)[1];
            ok = ok && mono && growth <= 0.2;
            d += fmt("s=%d %s S(32,64,128)=(%.3e,%.3e,%.3e) growth %.3f; ", s, S == &r.S_g ? "g" : "h",
                     (*S)[0], (*S)[1], (*S)[2], growth);
        }
    }
    report(4, "quadratic closeness tails", ok, d + "(growth <=0.2, monotone)");
}

void c5_closed_loop() {
    bool ok = true;
    std::string d;
    for (double lam : {0.5, 1.0, 2.0}) {
        Timer tm;
        Synthesis s = synthesize(kSquare, 32, lam);
        TransformOperator T = assemble_T(s.basis, s.gains, s.table);
        SimOptions o;
        SimulationTrace a = simulate(unit_mode(32, 2), s.gains, s.table, o);
        o.dt /= 2;
        SimulationTrace b = simulate(unit_mode(32, 2), s.gains, s.table, o);
        double sec = tm.seconds();
        double rel = std::abs(a.fitted_rate - lam) / lam;
        double dtchg = std::abs(b.fitted_rate - a.fitted_rate) / a.fitted_rate;
        ok = ok && rel <= 0.05 && a.measured_C <= 1.1 * T.cond && dtchg < 0.005 && !a.unstable && sec < 30;
        d += fmt("lam=%g rate %.5f (%.2f%%) C %.3f vs 1.1cond %.3f, dt/2 change %.3f%%, %.1fs; ", lam,
                 a.fitted_rate, 100 * rel, a.measured_C, 1.1 * T.cond, 100 * dtchg, sec);
    }
    report(5, "closed-loop decay", ok, d);
}

void c6_target() {
    ModeTable t = make_mode_table(kSquare, 32, 1.0);
    double worst = 0;
    for (double lam : {0.5, 1.0, 2.0}) {
        SpectralState x = unit_mode(32, 2);
        x.p[4] = 0.3;
        double dt = 1e-3, f = (1 - lam * dt / 2) / (1 + lam * dt / 2);
        for (int i = 0; i < 100; ++i) {
            SpectralState y = step_target(x, lam, t, dt);
            worst = std::max(worst, std::abs(sobolev_norm(y, 3) / sobolev_norm(x, 3) - f));
            x = y;
        }
    }
    FeedbackGains zero{Vec::Zero(32), Vec::Zero(32), {}, {}, 0, 0, 0};
    SpectralState x(32);
    for (int k = 0; k < 32; ++k) x.p[k] = 1.0 / std::pow(k + 1, 4), x.q[k] = -0.5 / std::pow(k + 1, 4);
    double n0 = sobolev_norm(x, 3);
    for (int i = 0; i < 10000; ++i) x = step_closed_loop(x, zero, t, 1e-3);
    double drift = std::abs(sobolev_norm(x, 3) - n0) / n0;
    report(6, "target-system exactness", worst <= 1e-12 && drift <= 1e-10,
           fmt("per-step contraction error %.2e (<=1e-12), open-loop drift over 1e4 steps %.2e (<=1e-10)", worst,
               drift));
}

void c7_operator_equality() {
    // The Galerkin truncation satisfies the identity to roundoff at every N,
    // so the N-dependence is measured against a 512-mode reference plant and
    // transform with the N-mode gains.
    const int Nref = 512;
    Synthesis ref = synthesize(kSquare, Nref, 1.0);
    TransformOperator T = assemble_T(ref.basis, ref.gains, ref.table);
    std::vector<SpectralState> states;
    states.push_back(unit_mode(Nref, 2));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    for (int i = 0; i < 4; ++i) {
        SpectralState x(Nref);
        for (int k = 0; k < 16; ++k) x.p[k] = g(rng), x.q[k] = g(rng);
        states.push_back(x);
    }
    std::vector<double> r, self;
    for (int N : {64, 128, 256}) {
        Synthesis s = synthesize(kSquare, N, 1.0);
        TransformOperator TN = assemble_T(s.basis, s.gains, s.table);
        double w = 0, ws = 0;
        for (const auto& x : states) {
            w = std::max(w, operator_equality_residual(T.T, s.gains, ref.table, x));
            SpectralState xs(N);
            xs.p = x.p.head(N);
            xs.q = x.q.head(N);
            ws = std::max(ws, operator_equality_residual(TN.T, s.gains, s.table, xs));
        }
        r.push_back(w);
        self.push_back(ws);
    }
    bool ok = r[1] < r[0] && r[2] < r[1];
    report(7, "operator equality", ok,
           fmt("residual vs %d-mode reference N=64,128,256: %.3e, %.3e, %.3e (decreasing); "
               "truncated-system residual %.1e, %.1e, %.1e",
               Nref, r[0], r[1], r[2], self[0], self[1], self[2]));
}

double placement_deviation(int N, double lam) {
    Synthesis s = synthesize(kSquare, N, lam);
    Eigen::EigenSolver<Mat> es(closed_loop_matrix(s.table, s.gains), false);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) { return std::abs(a.imag()) < std::abs(b.imag()); });
    double dev = 0;
    for (int i = 0; i < 2 * (N / 4); ++i) dev = std::max(dev, std::abs(ev[i].real() + lam) / lam);
    return dev;
}

void c8_eigenvalues() {
    double d128 = placement_deviation(128, 1.0), d256 = placement_deviation(256, 1.0);
    bool ok = d128 <= 0.1 && d256 < d128;
    report(8, "eigenvalue placement", ok,
           fmt("max |Re+lam|/lam over lowest N/4 pairs: N=128 %.3e (<=0.1), N=256 %.3e (must be smaller)", d128,
               d256));
}

void c9_fredholm() {
    std::vector<double> frac;
    double cond = 0;
    for (int N : {64, 128, 256}) {
        Synthesis s = synthesize(kSquare, N, 1.0);
        FredholmSplit f = fredholm_split(s.basis, s.gains, s.table);
        frac.push_back(f.tail_fraction);
        if (N == 128) cond = f.Ttilde.cond;
    }
    bool ok = std::isfinite(cond) && frac[1] <= 0.3 && frac[1] < frac[0] && frac[2] < frac[1];
    report(9, "Fredholm split", ok,
           fmt("cond(T~)=%.4f at N=128, top-half HS share N=64,128,256: %.3e, %.3e, %.3e (<=0.3 at 128, decreasing)",
               cond, frac[0], frac[1], frac[2]));
}

void c10_saint_venant() {
    Timer tm;
    const double lam = 0.5;
    RiemannGrid g = sv_initial(400, lam);
    double w0 = weighted_energy_sv(g), werr = 0;
    for (int i = 1; i <= 4000; ++i) {
        g = step_sv(g);
        double expect = w0 * std::exp(-2 * lam * i * g.dx());
        werr = std::max(werr, std::abs(weighted_energy_sv(g) - expect) / expect);
    }
    double refl = std::abs(reflection_coefficient(lam) + std::exp(-2 * lam));
    Eigen::VectorXd exact = exact_gains_sv(lam, 8);
    std::vector<double> gerr;
    double a1 = 0;
    for (int M : {100, 200, 400, 800}) {
        auto [p1, p2] = projected_gains_sv(M, lam, 8);
        a1 = std::max(a1, p1.cwiseAbs().maxCoeff());
        gerr.push_back((p2 - exact).cwiseAbs().maxCoeff());
    }
    bool dec = std::is_sorted(gerr.rbegin(), gerr.rend()) && gerr[3] < gerr[0];
    double sec = tm.seconds();
    report(10, "Saint-Venant oracle", werr <= 1e-10 && refl <= 1e-12 && a1 == 0 && dec && sec < 5,
           fmt("transformed energy rel err %.2e (<=1e-10), reflection err %.1e (<=1e-12), alpha1 max %.1e, "
               "gain err M=100..800: %.2e %.2e %.2e %.2e, %.2fs",
               werr, refl, a1, gerr[0], gerr[1], gerr[2], gerr[3], sec));
}

void c11_regularity() {
    const int N = 128;
    // The N-mode solve carries a boundary layer in its last few alpha1 entries;
    // the sequence n <= N is read from a 2N-mode solve.
    auto check = [&](const Synthesis& s, double& q4, double& q3, double& c4, double& c3, double& floor_hi,
                     double& floor_lo) {
        FeedbackGains tl = tilde_gains(s.table);
        q4 = q3 = c4 = c3 = 0;
        floor_hi = floor_lo = INFINITY;
        for (int n = 1; n <= N; ++n) {
            double n3 = std::pow(n, 3);
            double a1 = std::abs(s.gains.alpha1[n - 1]) / n3;
            double c = std::abs(s.gains.alpha2[n - 1] - tl.alpha2[n - 1]) / n3;
            double a2 = std::abs(s.gains.alpha2[n - 1]) / n3;
            if (n > 3 * N / 4) q4 = std::max(q4, a1), c4 = std::max(c4, c);
            else if (n > N / 2) q3 = std::max(q3, a1), c3 = std::max(c3, c);
            if (n > N / 2) floor_hi = std::min(floor_hi, a2);
            else if (n > N / 4) floor_lo = std::min(floor_lo, a2);
        }
        return q4 < q3 && c4 < c3 && floor_hi > 0 && floor_hi >= 0.5 * floor_lo;
    };
    double q4, q3, c4, c3, fh, fl;
    bool ok = check(synthesize(kSquare, 2 * N, 1.0), q4, q3, c4, c3, fh, fl);
    double lq4, lq3, lc4, lc3, lfh, lfl;
    bool lit = check(synthesize(kSquare, N, 1.0), lq4, lq3, lc4, lc3, lfh, lfl);
    report(11, "feedback regularity split", ok,
           fmt("n<=128 from 256-mode solve: |a1|/n^3 top/second quarter max %.3e/%.3e, corrected |a2|/n^3 "
               "%.3e/%.3e, |a2|/n^3 floor %.4f (second quarter %.4f); 128-mode solve alone %s (a1 %.3e/%.3e)",
               q4, q3, c4, c3, fh, fl, lit ? "passes" : "fails", lq4, lq3));
}

void c12_rotating() {
    Synthesis s = synthesize(kSquare, 32, 1.0, true);
    SimOptions o;
    SimulationTrace a = simulate(unit_mode(32, 2), s.gains, s.table, o);
    SimulationTrace b = simulate_rotating(unit_mode(32, 2), s.gains, s.table, o);
    double diff = 0;
    for (std::size_t i = 0; i < a.norm3.size(); ++i)
        diff = std::max(diff, std::abs(a.norm3[i] - b.norm3[i]) / a.norm3[0]);
    double rel = std::abs(b.fitted_rate - 1.0);
    report(12, "shifted-static vs rotating feedback", a.norm3.size() == b.norm3.size() && diff <= 1e-8 && rel <= 0.05,
           fmt("max H3 trace difference %.2e (<=1e-8), rotating rate %.5f (within 5%% of 1)", diff, b.fitted_rate));
}

}  // namespace

int main() {
    Timer total;
    c1_finite_dim();
    c2_tb_eq_b();
    c3_normalization();
    c4_tails();
    c5_closed_loop();
    c6_target();
    c7_operator_equality();
    c8_eigenvalues();
    c9_fredholm();
    c10_saint_venant();
    c11_regularity();
    c12_rotating();
    std::printf("%d of 12 criteria failed, %.1fs\n", failures, total.seconds());
    return failures ? 1 : 0;
}
