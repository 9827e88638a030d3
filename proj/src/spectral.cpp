#include "rapidstab/spectral.hpp"
#include "rapidstab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>

namespace rapidstab {

using std::numbers::pi;

double eigenvalue(int k) { return (k * pi) * (k * pi); }

double eigenfunction(int k, double x) { return std::numbers::sqrt2 * std::sin(k * pi * x); }

Vec SpectralState::stacked() const {
    Vec u(2 * size());
    u << p, q;
    return u;
}

SpectralState SpectralState::from_stacked(const Vec& u) {
    int n = static_cast<int>(u.size() / 2);
    SpectralState s;
    s.p = u.head(n);
    s.q = u.tail(n);
    return s;
}

double sobolev_norm(const SpectralState& x, double s) { return weighted(x, s).norm(); }

Vec weighted(const SpectralState& x, double s) {
    int n = x.size();
    Vec u(2 * n);
    for (int k = 1; k <= n; ++k) {
        double w = std::pow(eigenvalue(k), s / 2);
        u[k - 1] = w * x.p[k - 1];
        u[n + k - 1] = w * x.q[k - 1];
    }
    return u;
}

SpectralState unweighted(const Vec& u, double s) {
    int n = static_cast<int>(u.size() / 2);
    SpectralState x(n);
    for (int k = 1; k <= n; ++k) {
        double w = std::pow(eigenvalue(k), -s / 2);
        x.p[k - 1] = w * u[k - 1];
        x.q[k - 1] = w * u[n + k - 1];
    }
    return x;
}

int default_panels(int n_modes) { return (4 * n_modes + 7) / 8 + 4; }

Quadrature gauss_legendre(int panels) {
    using Rule = boost::math::quadrature::gauss<double, 8>;
    const auto& a = Rule::abscissa();
    const auto& wt = Rule::weights();
    Quadrature q;
    q.x.reserve(8 * panels);
    q.w.reserve(8 * panels);
    double h = 1.0 / panels;
    for (int p = 0; p < panels; ++p) {
        double mid = (p + 0.5) * h;
        for (std::size_t i = 0; i < a.size(); ++i) {
            q.x.push_back(mid - 0.5 * h * a[i]);
            q.w.push_back(0.5 * h * wt[i]);
            q.x.push_back(mid + 0.5 * h * a[i]);
            q.w.push_back(0.5 * h * wt[i]);
        }
    }
    return q;
}

Vec project_serial(const std::vector<double>& fvals, const Quadrature& q, int n_modes) {
    Vec c(n_modes);
    for (int k = 1; k <= n_modes; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < q.x.size(); ++i)
            s += q.w[i] * fvals[i] * eigenfunction(k, q.x[i]);
        c[k - 1] = s;
    }
    return c;
}

Vec project_omp(const std::vector<double>& fvals, const Quadrature& q, int n_modes) {
    Vec c(n_modes);
    const int nq = static_cast<int>(q.x.size());
#pragma omp parallel for schedule(static)
    for (int k = 1; k <= n_modes; ++k) {
        double s = 0;
        for (int i = 0; i < nq; ++i)
            s += q.w[i] * fvals[i] * eigenfunction(k, q.x[i]);
        c[k - 1] = s;
    }
    return c;
}

static Vec project_with(const std::function<double(double)>& f, int n_modes, int panels) {
    Quadrature q = gauss_legendre(panels);
    std::vector<double> fv(q.x.size());
    for (std::size_t i = 0; i < q.x.size(); ++i) fv[i] = f(q.x[i]);
    return project_omp(fv, q, n_modes);
}

Vec project(const std::function<double(double)>& f, int n_modes, int panels) {
    if (panels <= 0) panels = default_panels(n_modes);
    Vec c = project_with(f, n_modes, panels);
    Vec c2 = project_with(f, n_modes, 2 * panels);
    double scale = c2.cwiseAbs().maxCoeff();
    if (scale > 0 && (c - c2).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw QuadratureUnderresolved("projection changes under panel doubling at N=" +
                                      std::to_string(n_modes));
    return c;
}

// Integration by parts with omega = a pi, where sin(omega) = 0 and cos(omega) = (-1)^a.
static void trig_moments(int j, int a, double& cj, double& sj) {
    if (a == 0) {
        cj = 1.0 / (j + 1);
        sj = 0;
        return;
    }
    double w = a * pi;
    double cw = (a % 2 == 0) ? 1.0 : -1.0;
    double c = 0, s = (1 - cw) / w;
    for (int i = 1; i <= j; ++i) {
        double cn = -(i / w) * s;
        double sn = -cw / w + (i / w) * c;
        c = cn;
        s = sn;
    }
    cj = c;
    sj = s;
}

double cos_moment(int j, int a) {
    double c, s;
    trig_moments(j, std::abs(a), c, s);
    return c;
}

double sin_moment(int j, int a) {
    double c, s;
    trig_moments(j, std::abs(a), c, s);
    return a < 0 ? -s : s;
}

Vec project_polynomial(const std::vector<double>& c, int n_modes) {
    Vec out = Vec::Zero(n_modes);
    for (int k = 1; k <= n_modes; ++k)
        for (std::size_t j = 0; j < c.size(); ++j)
            out[k - 1] += std::numbers::sqrt2 * c[j] * sin_moment(static_cast<int>(j), k);
    return out;
}

double synthesize(const Vec& coef, double x) {
    double s = 0;
    for (int k = 1; k <= coef.size(); ++k) s += coef[k - 1] * eigenfunction(k, x);
    return s;
}

}  // namespace rapidstab
