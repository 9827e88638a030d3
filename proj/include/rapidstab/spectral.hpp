#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rapidstab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Dirichlet Laplacian on (0,1): lambda_k = (k pi)^2, phi_k = sqrt(2) sin(k pi x), k >= 1.
double eigenvalue(int k);
double eigenfunction(int k, double x);

// Real and imaginary sine coefficients of a state, modes 1..N stored at index k-1.
struct SpectralState {
    Vec p;
    Vec q;

    SpectralState() = default;
    explicit SpectralState(int n) : p(Vec::Zero(n)), q(Vec::Zero(n)) {}
    int size() const { return static_cast<int>(p.size()); }

    // Stacked (p, q) and back.
    Vec stacked() const;
    static SpectralState from_stacked(const Vec& u);
};

double sobolev_norm(const SpectralState& x, double s);

// Stacked vector weighted by lambda_k^{s/2}; the Euclidean norm is the H^s norm.
Vec weighted(const SpectralState& x, double s);
SpectralState unweighted(const Vec& u, double s);

// Composite Gauss-Legendre rule on [0,1], 8 nodes per panel.
struct Quadrature {
    std::vector<double> x;
    std::vector<double> w;
};
int default_panels(int n_modes);
Quadrature gauss_legendre(int panels);

// <f, phi_k> for k = 1..N. Throws QuadratureUnderresolved when doubling the
// panel count moves any coefficient by more than 1e-10 of the largest one.
Vec project(const std::function<double(double)>& f, int n_modes, int panels = 0);
Vec project_serial(const std::vector<double>& fvals, const Quadrature& q, int n_modes);
Vec project_omp(const std::vector<double>& fvals, const Quadrature& q, int n_modes);

// Exact moments of polynomials against trig functions.
// cos_moment(j, a) = int_0^1 x^j cos(a pi x) dx, sin_moment(j, a) likewise with sin.
double cos_moment(int j, int a);
double sin_moment(int j, int a);

// Exact <P, phi_k> for the polynomial P(x) = sum_j c[j] x^j.
Vec project_polynomial(const std::vector<double>& c, int n_modes);

// Evaluate sum_k (p_k or q_k) phi_k at x.
double synthesize(const Vec& coef, double x);

}  // namespace rapidstab
