#include "rapidstab/moment.hpp"
#include "rapidstab/basis.hpp"
#include "rapidstab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rapidstab {

using std::numbers::pi;

DipolarMoment DipolarMoment::polynomial(std::vector<double> c) {
    DipolarMoment mu;
    mu.kind = Kind::Polynomial;
    mu.coef = std::move(c);
    mu.mu_p0 = mu.coef.size() > 1 ? mu.coef[1] : 0.0;
    mu.mu_p1 = 0;
    for (std::size_t j = 1; j < mu.coef.size(); ++j) mu.mu_p1 += j * mu.coef[j];
    return mu;
}

double one_sided_derivative(const double* x, const double* v) {
    // d/dx of the Lagrange interpolant at x[0].
    double d = 0;
    for (int i = 0; i < 5; ++i) {
        double li = 0;  // l_i'(x0)
        if (i == 0) {
            for (int j = 1; j < 5; ++j) li += 1.0 / (x[0] - x[j]);
        } else {
            double num = 1, den = 1;
            for (int j = 0; j < 5; ++j) {
                if (j == i) continue;
                den *= x[i] - x[j];
                if (j != 0) num *= x[0] - x[j];
            }
            li = num / den;
        }
        d += li * v[i];
    }
    return d;
}

DipolarMoment DipolarMoment::sampled(std::vector<double> x, std::vector<double> v) {
    if (x.size() != v.size() || x.size() < 5)
        throw UsageError("sampled moment needs at least 5 matching nodes and values");
    if (!std::is_sorted(x.begin(), x.end()))
        throw UsageError("sample nodes must be increasing");
    DipolarMoment mu;
    mu.kind = Kind::Sampled;
    mu.nodes = std::move(x);
    mu.values = std::move(v);
    mu.mu_p0 = one_sided_derivative(mu.nodes.data(), mu.values.data());
    std::vector<double> rx(mu.nodes.rbegin(), mu.nodes.rbegin() + 5);
    std::vector<double> rv(mu.values.rbegin(), mu.values.rbegin() + 5);
    mu.mu_p1 = one_sided_derivative(rx.data(), rv.data());
    return mu;
}

double DipolarMoment::operator()(double x) const {
    if (kind == Kind::Polynomial) {
        double s = 0;
        for (auto it = coef.rbegin(); it != coef.rend(); ++it) s = s * x + *it;
        return s;
    }
    // Local cubic through the four nearest nodes.
    std::size_t n = nodes.size();
    std::size_t i = std::upper_bound(nodes.begin(), nodes.end(), x) - nodes.begin();
    std::size_t lo = i < 2 ? 0 : i - 2;
    if (lo + 4 > n) lo = n - 4;
    double s = 0;
    for (std::size_t a = lo; a < lo + 4; ++a) {
        double l = 1;
        for (std::size_t b = lo; b < lo + 4; ++b)
            if (b != a) l *= (x - nodes[b]) / (nodes[a] - nodes[b]);
        s += l * values[a];
    }
    return s;
}

void DipolarMoment::validate(double tol) const {
    if (std::abs(mu_p1 - mu_p0) <= tol || std::abs(mu_p1 + mu_p0) <= tol)
        throw HypothesisViolation("mu'(1) = +-mu'(0): the moments cannot satisfy the cubic lower bound",
                                  0, 0.0);
}

double corrector_coefficient(const DipolarMoment& mu, int k) {
    double sgn = (k % 2 == 1) ? 1.0 : -1.0;
    return 4.0 / (k * k * k * pi * pi) * (sgn * mu.mu_p1 - mu.mu_p0);
}

MomentData moment_coefficients(const DipolarMoment& mu, int n_modes) {
    MomentData d;
    if (mu.kind == DipolarMoment::Kind::Polynomial) {
        d.m = Vec::Zero(n_modes);
        for (int k = 1; k <= n_modes; ++k)
            for (std::size_t j = 0; j < mu.coef.size(); ++j) {
                int jj = static_cast<int>(j);
                d.m[k - 1] += mu.coef[j] * (cos_moment(jj, k - 1) - cos_moment(jj, k + 1));
            }
    } else {
        d.m = project([&](double x) { return mu(x) * eigenfunction(1, x); }, n_modes);
    }
    d.residual = d.m;
    for (int k = 1; k <= n_modes; ++k) d.residual[k - 1] -= corrector_coefficient(mu, k);
    return d;
}

HypothesisReport check_hypothesis(const Vec& m, double tol) {
    HypothesisReport r;
    r.c_lower = INFINITY;
    r.c_upper = 0;
    for (int k = 1; k <= m.size(); ++k) {
        double v = double(k) * k * k * std::abs(m[k - 1]);
        if (v < r.c_lower) {
            r.c_lower = v;
            r.worst_k = k;
        }
        r.c_upper = std::max(r.c_upper, v);
    }
    r.passed = r.c_lower > tol;
    return r;
}

HypothesisReport require_hypothesis(const Vec& m, double tol) {
    HypothesisReport r = check_hypothesis(m, tol);
    if (!r.passed)
        throw HypothesisViolation("k^3 |m_k| falls to " + std::to_string(r.c_lower) + " at k=" +
                                      std::to_string(r.worst_k),
                                  r.worst_k, r.c_lower);
    return r;
}

CubicCorrector cubic_corrector(const DipolarMoment& mu) {
    double s = -pi * std::numbers::sqrt2 / 3;
    CubicCorrector h;
    h.a3 = s * (mu.mu_p0 + mu.mu_p1);
    h.a2 = s * (-3 * mu.mu_p0);
    h.a1 = s * (2 * mu.mu_p0 - mu.mu_p1);
    return h;
}

Vec CubicCorrector::coefficients(int n_modes) const {
    return project_polynomial({0.0, a1, a2, a3}, n_modes);
}

ModeTable make_mode_table(const DipolarMoment& mu, int n_modes, double lam, bool shifted) {
    mu.validate();
    ModeTable t;
    t.N = n_modes;
    t.lam = lam;
    t.lambda_shift = shifted ? eigenvalue(1) : 0.0;
    t.lambda.resize(n_modes);
    t.lambda_t.resize(n_modes);
    t.h.resize(n_modes);
    for (int k = 1; k <= n_modes; ++k) {
        t.lambda[k - 1] = eigenvalue(k);
        t.lambda_t[k - 1] = eigenvalue(k) - t.lambda_shift;
        t.h[k - 1] = corrector_coefficient(mu, k);
    }
    t.m = moment_coefficients(mu, n_modes).m;
    t.hypothesis = require_hypothesis(t.m);
    beta_coefficients(t);
    return t;
}

}  // namespace rapidstab
