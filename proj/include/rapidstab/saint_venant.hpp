#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

namespace rapidstab {

// Riemann invariants R1 = h_x + v_x (moves right) and R2 = h_x - v_x (moves
// left) on M uniform cells of (0,1); cell j sits at (j + 1/2)/M.
struct RiemannGrid {
    int M = 0;
    double lam = 0;
    Eigen::VectorXd R1, R2;

    double dx() const { return 1.0 / M; }
    double x(int j) const { return (j + 0.5) / M; }
};

// Ratio R2(t,1)/R1(t,1) imposed by u = -tanh(lam) v_x(t,1).
double reflection_coefficient(double lam);

// u = -tanh(lam) v_x(t,1), with v_x(1) = (R1 - R2)(1)/2 and R1(1) read from the last cell.
double feedback_sv(const RiemannGrid& g);

// One exact shift (dt = dx) with both boundary relations applied.
RiemannGrid step_sv(const RiemannGrid& g);
// Same for the damped target system: R~1(0) = R~2(0), R~2(1) = -R~1(1), factor exp(-lam dt).
RiemannGrid step_target_sv(const RiemannGrid& g);

double energy_sv(const RiemannGrid& g);           // int R1^2 + R2^2
double weighted_energy_sv(const RiemannGrid& g);  // int (e^{-lam x} R1)^2 + (e^{lam x} R2)^2

// (R1, R2) -> (e^{-lam x} R1, e^{lam x} R2) / cosh(lam)
RiemannGrid to_target(const RiemannGrid& g);

// Nodal (h, v) on x_i = i/M, i = 0..M, to cell invariants by differences at
// the cell midpoints, and back by cumulative sums using h(0) = v(1) = 0.
RiemannGrid from_hv(const Eigen::VectorXd& h, const Eigen::VectorXd& v, double lam);
std::pair<Eigen::VectorXd, Eigen::VectorXd> to_hv(const RiemannGrid& g);

struct SvTransform {
    Eigen::VectorXd h, v;
    double h_at_0 = 0;  // target boundary values, both zero for compatible input
    double v_at_1 = 0;
};

// Closed-form integral transformation on nodal data (trapezoidal integrals).
SvTransform explicit_transform_sv(const Eigen::VectorXd& h, const Eigen::VectorXd& v, double lam);

struct SvTrace {
    std::vector<double> t, energy, weighted, u;
    double fitted_rate = 0;  // decay rate of energy
};

SvTrace simulate_sv(RiemannGrid g, double t_final, double fit_t0, double fit_t1);

// Gains of the feedback as it enters the plant (-u), evaluated on the modes
// sin(n pi x): alpha1_n from h = sin, alpha2_n from v = sin. The derivative
// at x = 1 uses the second order one-sided difference on M cells.
std::pair<Eigen::VectorXd, Eigen::VectorXd> projected_gains_sv(int M, double lam, int n_modes);
Eigen::VectorXd exact_gains_sv(double lam, int n_modes);

// Operator identity T (A + BK) R = (A - lam) T R for smooth R in the closed
// loop domain, evaluated pointwise from closed forms; returns the relative sup error.
double sv_operator_equality_residual(double lam, int n_modes, int n_points);

// Smooth boundary-compatible initial data used by tests and the CLI.
RiemannGrid sv_initial(int M, double lam);

}  // namespace rapidstab
