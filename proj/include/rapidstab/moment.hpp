#pragma once

#include "rapidstab/spectral.hpp"

#include <string>
#include <vector>

namespace rapidstab {

// The dipolar moment mu, either a polynomial or samples on a node list.
struct DipolarMoment {
    enum class Kind { Polynomial, Sampled };
    Kind kind = Kind::Polynomial;
    std::vector<double> coef;   // polynomial coefficients, coef[j] multiplies x^j
    std::vector<double> nodes;  // sampled representation, increasing in [0,1]
    std::vector<double> values;
    double mu_p0 = 0;  // mu'(0)
    double mu_p1 = 0;  // mu'(1)

    static DipolarMoment polynomial(std::vector<double> c);
    static DipolarMoment sampled(std::vector<double> x, std::vector<double> v);

    double operator()(double x) const;

    // Throws HypothesisViolation when mu'(1) = +-mu'(0) within tol.
    void validate(double tol = 1e-8) const;
};

// Derivative at nodes[0] of the interpolant through the first five nodes
// (fourth order one-sided difference). Pass reversed data for the right end.
double one_sided_derivative(const double* x, const double* v);

struct MomentData {
    Vec m;         // m_k = <mu phi_1, phi_k>
    Vec residual;  // m_k - h_k
};

MomentData moment_coefficients(const DipolarMoment& mu, int n_modes);

struct HypothesisReport {
    double c_lower = 0;
    double c_upper = 0;
    int worst_k = 0;
    bool passed = false;
};

HypothesisReport check_hypothesis(const Vec& m, double tol = 1e-8);
// Same as check_hypothesis but throws HypothesisViolation on failure.
HypothesisReport require_hypothesis(const Vec& m, double tol = 1e-8);

// Cubic h with mu phi_1 - h vanishing to the order needed at both ends.
struct CubicCorrector {
    double a1 = 0, a2 = 0, a3 = 0;  // h(x) = a1 x + a2 x^2 + a3 x^3
    double operator()(double x) const { return x * (a1 + x * (a2 + x * a3)); }
    Vec coefficients(int n_modes) const;  // exact projection onto phi_k
};

CubicCorrector cubic_corrector(const DipolarMoment& mu);

// Closed form 4/(k^3 pi^2) ((-1)^{k+1} mu'(1) - mu'(0)).
double corrector_coefficient(const DipolarMoment& mu, int k);

// Everything the synthesis needs about the modes, at truncation N.
struct ModeTable {
    int N = 0;
    double lam = 0;           // target decay rate
    double lambda_shift = 0;  // 0, or lambda_1 in the shifted (rotating) setting
    Vec lambda;               // lambda_k
    Vec lambda_t;             // lambda_k - lambda_shift
    Vec m;
    Vec h;
    Vec beta1;  // beta1[0] is unused (zero) in the shifted setting
    Vec beta2;
    HypothesisReport hypothesis;

    bool shifted() const { return lambda_shift != 0; }
    // Whether the g-family has a member at index n (0-based).
    bool has_g(int n) const { return !(shifted() && n == 0); }
};

ModeTable make_mode_table(const DipolarMoment& mu, int n_modes, double lam, bool shifted = false);

}  // namespace rapidstab
