#pragma once

#include "rapidstab/stabilizer.hpp"

#include <Eigen/LU>
#include <ostream>
#include <string>
#include <vector>

namespace rapidstab {

// Implicit midpoint for u' = M u with the factorization of (I - dt/2 M) cached.
class CayleyStepper {
public:
    CayleyStepper(const Mat& M, double dt);
    Vec step(const Vec& u) const;

private:
    Mat M_;
    double dt_;
    Eigen::PartialPivLU<Mat> lu_;
};

SpectralState step_closed_loop(const SpectralState& x, const FeedbackGains& g, const ModeTable& t,
                               double dt);

// Cayley step of the skew part followed by the scalar factor
// (1 - lam dt/2)/(1 + lam dt/2); the two commute, so the per-step norm ratio
// is exactly that factor.
SpectralState step_target(const SpectralState& x, double lam, const ModeTable& t, double dt);
// Plain implicit midpoint on A - lam; this is what the closed-loop scheme maps to under T.
SpectralState step_target_midpoint(const SpectralState& x, double lam, const ModeTable& t, double dt);

struct SimulationTrace {
    std::vector<double> times;
    std::vector<double> norm0;
    std::vector<double> norm3;
    std::vector<double> control;
    double fitted_rate = 0;
    double fit_t0 = 0, fit_t1 = 0;
    double measured_C = 0;
    bool unstable = false;
};

struct SimOptions {
    double dt = 1e-3;
    double t_final = 0;  // 0 selects 6/lam
    int sample_every = 1;
    double fit_t0 = 0, fit_t1 = 0;  // 0 selects [1, 6]/lam
    double guard = 1e6;
};

// Least squares slope of -log(norm) over times in [t0, t1].
double fit_rate(const std::vector<double>& times, const std::vector<double>& norms, double t0, double t1);

SimulationTrace simulate(const SpectralState& initial, const FeedbackGains& g, const ModeTable& t,
                         const SimOptions& opt);

struct TransformedTrace {
    std::vector<double> times;
    std::vector<double> divergence;  // ||T Psi(t) - xi(t)|| / ||xi(0)||
    std::vector<double> xi_norm;
};

TransformedTrace simulate_transformed(const SpectralState& initial, const FeedbackGains& g,
                                      const Mat& T, const ModeTable& t, const SimOptions& opt);

// Unshifted plant with the rotating feedback built from shifted gains.
// rotating_frame steps in the rotating frame (rotate, Cayley on the shifted
// closed loop, rotate back); otherwise plain implicit midpoint on the
// time-dependent system.
SimulationTrace simulate_rotating(const SpectralState& initial, const FeedbackGains& g_shifted,
                                  const ModeTable& t_shifted, const SimOptions& opt,
                                  bool rotating_frame = true);

// Multiply each mode (p_k + i q_k) by exp(i theta).
SpectralState rotate(const SpectralState& x, double theta);

void write_trace_csv(const SimulationTrace& tr, std::ostream& os);
std::string format_double(double v);

}  // namespace rapidstab
