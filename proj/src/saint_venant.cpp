#include "rapidstab/saint_venant.hpp"
#include "rapidstab/simulation.hpp"

#include <cmath>
#include <numbers>

namespace rapidstab {

using Eigen::VectorXd;
using std::numbers::pi;

double reflection_coefficient(double lam) {
    double th = std::tanh(lam);
    return (th - 1) / (th + 1);
}

double feedback_sv(const RiemannGrid& g) {
    double r1 = g.R1[g.M - 1];
    double r2 = reflection_coefficient(g.lam) * r1;
    return -std::tanh(g.lam) * 0.5 * (r1 - r2);
}

RiemannGrid step_sv(const RiemannGrid& g) {
    RiemannGrid n = g;
    const int M = g.M;
    n.R1.tail(M - 1) = g.R1.head(M - 1);
    n.R2.head(M - 1) = g.R2.tail(M - 1);
    n.R1[0] = g.R2[0];
    n.R2[M - 1] = reflection_coefficient(g.lam) * g.R1[M - 1];
    return n;
}

RiemannGrid step_target_sv(const RiemannGrid& g) {
    RiemannGrid n = g;
    const int M = g.M;
    double f = std::exp(-g.lam * g.dx());
    n.R1.tail(M - 1) = f * g.R1.head(M - 1);
    n.R2.head(M - 1) = f * g.R2.tail(M - 1);
    n.R1[0] = f * g.R2[0];
    n.R2[M - 1] = -f * g.R1[M - 1];
    return n;
}

double energy_sv(const RiemannGrid& g) { return g.dx() * (g.R1.squaredNorm() + g.R2.squaredNorm()); }

double weighted_energy_sv(const RiemannGrid& g) {
    double s = 0;
    for (int j = 0; j < g.M; ++j) {
        double a = std::exp(-g.lam * g.x(j)) * g.R1[j];
        double b = std::exp(g.lam * g.x(j)) * g.R2[j];
        s += a * a + b * b;
    }
    return s * g.dx();
}

RiemannGrid to_target(const RiemannGrid& g) {
    RiemannGrid t = g;
    double c = std::cosh(g.lam);
    for (int j = 0; j < g.M; ++j) {
        t.R1[j] = std::exp(-g.lam * g.x(j)) * g.R1[j] / c;
        t.R2[j] = std::exp(g.lam * g.x(j)) * g.R2[j] / c;
    }
    return t;
}

RiemannGrid from_hv(const VectorXd& h, const VectorXd& v, double lam) {
    RiemannGrid g;
    g.M = static_cast<int>(h.size()) - 1;
    g.lam = lam;
    g.R1.resize(g.M);
    g.R2.resize(g.M);
    for (int j = 0; j < g.M; ++j) {
        double hx = (h[j + 1] - h[j]) * g.M;
        double vx = (v[j + 1] - v[j]) * g.M;
        g.R1[j] = hx + vx;
        g.R2[j] = hx - vx;
    }
    return g;
}

std::pair<VectorXd, VectorXd> to_hv(const RiemannGrid& g) {
    VectorXd h = VectorXd::Zero(g.M + 1), v = VectorXd::Zero(g.M + 1);
    for (int j = 0; j < g.M; ++j) h[j + 1] = h[j] + g.dx() * 0.5 * (g.R1[j] + g.R2[j]);
    for (int j = g.M - 1; j >= 0; --j) v[j] = v[j + 1] - g.dx() * 0.5 * (g.R1[j] - g.R2[j]);
    return {h, v};
}

SvTransform explicit_transform_sv(const VectorXd& h, const VectorXd& v, double lam) {
    const int M = static_cast<int>(h.size()) - 1;
    const double dx = 1.0 / M;
    auto X = [&](int i) { return i * dx; };
    // Cumulative trapezoid integrals from 0 of sinh(lam y) h, cosh(lam y) v,
    // cosh(lam y) h, sinh(lam y) v.
    VectorXd Ish(M + 1), Icv(M + 1), Ich(M + 1), Isv(M + 1);
    Ish[0] = Icv[0] = Ich[0] = Isv[0] = 0;
    for (int i = 0; i < M; ++i) {
        double s0 = std::sinh(lam * X(i)), s1 = std::sinh(lam * X(i + 1));
        double c0 = std::cosh(lam * X(i)), c1 = std::cosh(lam * X(i + 1));
        Ish[i + 1] = Ish[i] + 0.5 * dx * (s0 * h[i] + s1 * h[i + 1]);
        Icv[i + 1] = Icv[i] + 0.5 * dx * (c0 * v[i] + c1 * v[i + 1]);
        Ich[i + 1] = Ich[i] + 0.5 * dx * (c0 * h[i] + c1 * h[i + 1]);
        Isv[i + 1] = Isv[i] + 0.5 * dx * (s0 * v[i] + s1 * v[i + 1]);
    }
    SvTransform out;
    out.h.resize(M + 1);
    out.v.resize(M + 1);
    double c = std::cosh(lam);
    for (int i = 0; i <= M; ++i) {
        double x = X(i), sx = std::sinh(lam * x), cx = std::cosh(lam * x);
        out.h[i] = (cx * h[i] - lam * Ish[i] - sx * v[i] + lam * Icv[i]) / c;
        out.v[i] = (std::sinh(lam) * h[M] - sx * h[i] - lam * (Ich[M] - Ich[i]) + cx * v[i] +
                    lam * (Isv[M] - Isv[i])) /
                   c;
    }
    out.h_at_0 = out.h[0];
    out.v_at_1 = out.v[M];
    return out;
}

SvTrace simulate_sv(RiemannGrid g, double t_final, double fit_t0, double fit_t1) {
    SvTrace tr;
    const long steps = std::lround(t_final * g.M);
    for (long i = 0; i <= steps; ++i) {
        tr.t.push_back(i * g.dx());
        tr.energy.push_back(energy_sv(g));
        tr.weighted.push_back(weighted_energy_sv(g));
        tr.u.push_back(feedback_sv(g));
        if (i < steps) g = step_sv(g);
    }
    tr.fitted_rate = fit_rate(tr.t, tr.energy, fit_t0, fit_t1);
    return tr;
}

std::pair<VectorXd, VectorXd> projected_gains_sv(int M, double lam, int n_modes) {
    const double dx = 1.0 / M;
    VectorXd a1 = VectorXd::Zero(n_modes), a2(n_modes);
    for (int n = 1; n <= n_modes; ++n) {
        // The functional reads v only, so alpha1 stays zero.
        auto v = [&](int i) { return std::sin(n * pi * (1.0 - i * dx)); };  // node M - i
        double vx1 = (3 * v(0) - 4 * v(1) + v(2)) / (2 * dx);
        a2[n - 1] = std::tanh(lam) * vx1;  // -u
    }
    return {a1, a2};
}

VectorXd exact_gains_sv(double lam, int n_modes) {
    VectorXd a(n_modes);
    for (int n = 1; n <= n_modes; ++n) a[n - 1] = ((n % 2) ? -1.0 : 1.0) * pi * n * std::tanh(lam);
    return a;
}

double sv_operator_equality_residual(double lam, int n_modes, int n_points) {
    // R1 = f, R2 = g with g(0) = f(0), g(1) = -exp(-2 lam) f(1).
    auto f = [&](double x, double& d) {
        double s = 0;
        d = 0;
        for (int n = 1; n <= n_modes; ++n) {
            s += std::cos(n * pi * x) / (n * n);
            d += -pi * std::sin(n * pi * x) / n;
        }
        return s;
    };
    double d0, f0 = f(0, d0), f1 = f(1, d0);
    double r = reflection_coefficient(lam);
    auto g = [&](double x, double& d) {
        double s = 0;
        d = 0;
        for (int n = 1; n <= n_modes; ++n) {
            s += std::sin(n * pi * x) / (n * n * n);
            d += pi * std::cos(n * pi * x) / (n * n);
        }
        // linear correction for the boundary relations
        double a = f0, b = r * f1 - f0;
        d += b;
        return s + a + b * x;
    };
    double c = std::cosh(lam), worst = 0, scale = 0;
    for (int i = 0; i <= n_points; ++i) {
        double x = double(i) / n_points, fd, gd;
        double fv = f(x, fd), gv = g(x, gd);
        double em = std::exp(-lam * x), ep = std::exp(lam * x);
        // T applied to the closed-loop generator (-f', g')
        double l1 = -em * fd / c, l2 = ep * gd / c;
        // (A - lam) applied to T R = (em f, ep g)/c, derivatives by the product rule
        double r1 = -(em * fd - lam * em * fv) / c - lam * em * fv / c;
        double r2 = (ep * gd + lam * ep * gv) / c - lam * ep * gv / c;
        worst = std::max({worst, std::abs(l1 - r1), std::abs(l2 - r2)});
        scale = std::max({scale, std::abs(l1), std::abs(l2)});
    }
    return scale > 0 ? worst / scale : 0;
}

RiemannGrid sv_initial(int M, double lam) {
    // h = sin(pi x / 2)^2 x, v = (1 - x) sin(3 x), both smooth with h(0) = v(1) = 0.
    VectorXd h(M + 1), v(M + 1);
    for (int i = 0; i <= M; ++i) {
        double x = double(i) / M;
        h[i] = x * std::pow(std::sin(pi * x / 2), 2);
        v[i] = (1 - x) * std::sin(3 * x);
    }
    return from_hv(h, v, lam);
}

}  // namespace rapidstab
