#pragma once

#include "rapidstab/basis.hpp"

#include <vector>

namespace rapidstab {

struct FeedbackGains {
    Vec alpha1;
    Vec alpha2;
    Vec a1;  // basis coordinates of (0, mu phi_1)
    Vec a2;
    double rotation_omega = 0;
    double residual = 0;      // ||G a - b|| in X^2 coordinates
    double residual_rel = 0;  // divided by ||b||

    int size() const { return static_cast<int>(alpha1.size()); }
};

// X^2 and X^3 coordinates of (0, mu phi_1) truncated to N modes.
Vec control_vector(const ModeTable& t, double s);

// Throws NearSingularBasis when the frame bound check fails.
FeedbackGains solve_tb_eq_b(const BasisFamily& b, const ModeTable& t);

struct TransformOperator {
    int N = 0;
    Mat T;     // acts on X^3 coordinates
    Mat Tinv;  // inverse on the active coordinates, zero elsewhere
    double norm = 0;
    double cond = 0;
    std::vector<int> active;
};

// Matrix only; no factorization.
Mat transform_matrix(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t);
TransformOperator assemble_T(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t);

// Gains (0, lambda_n beta2_n h_n / m_n).
FeedbackGains tilde_gains(const ModeTable& t);

struct FredholmSplit {
    TransformOperator Ttilde;
    Vec hs;          // X^3 norms of the columns of T - Ttilde, p-columns then q-columns
    Vec hs_mode;     // per mode n: sqrt(hs_p(n)^2 + hs_q(n)^2)
    double tail_fraction = 0;  // share of sum hs_mode^2 carried by modes n > N/2
};

FredholmSplit fredholm_split(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t);
FredholmSplit fredholm_split(const BasisFamily& b, const FeedbackGains& g, const FeedbackGains& tilde,
                             const ModeTable& t);

// A + B K in sine coefficient coordinates (stacked p, q). Gains shorter than
// the table are padded with zeros.
Mat closed_loop_matrix(const ModeTable& t, const FeedbackGains& g);
Mat skew_matrix(const Vec& eig);

// Time-invariant feedback value sum alpha1 p + alpha2 q over the gain length.
double static_feedback(const FeedbackGains& g, const SpectralState& x);
// With rotation_omega != 0 the state is rotated by omega t before the dot product.
double feedback_value(const FeedbackGains& g, const SpectralState& x, double t);

// ||T (A+BK) x - (A - lam) T x|| / ||(A+BK) x||, all in X^3 coordinates.
double operator_equality_residual(const Mat& T, const FeedbackGains& g, const ModeTable& t,
                                  const SpectralState& x);

// Adjust the two highest supported p-coefficients (least squares) so that the
// feedback vanishes, which is what the boundary relation of the domain
// reduces to for finite sine sums when mu'(0) or mu'(1) is nonzero.
SpectralState strict_domain_state(const SpectralState& x, const FeedbackGains& g);

// Mode table, tensors, basis and gains in one go.
struct Synthesis {
    ModeTable table;
    KernelTensor tensors;
    BasisFamily basis;
    FeedbackGains gains;
};

Synthesis synthesize(const DipolarMoment& mu, int N, double lam, bool shifted = false);

}  // namespace rapidstab
