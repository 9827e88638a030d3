#include "rapidstab/stabilizer.hpp"
#include "rapidstab/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>

namespace rapidstab {

Vec control_vector(const ModeTable& t, double s) {
    Vec b = Vec::Zero(2 * t.N);
    for (int k = 0; k < t.N; ++k) b[t.N + k] = std::pow(t.lambda[k], s / 2) * t.m[k];
    return b;
}

FeedbackGains solve_tb_eq_b(const BasisFamily& b, const ModeTable& t) {
    FrameBounds fb = frame_bounds(b, 2);
    if (fb.near_singular)
        throw NearSingularBasis("basis Gram matrix is near singular, sigma_min=" +
                                    std::to_string(fb.sigma_min),
                                fb.sigma_min);
    const int N = t.N;
    Mat G = b.G2(b.active, b.active);
    Vec rhs_full = control_vector(t, 2);
    Vec rhs = rhs_full(b.active);

    Eigen::PartialPivLU<Mat> lu(G);
    Vec a = lu.solve(rhs);
    a += lu.solve(rhs - G * a);  // one refinement step

    Vec full = Vec::Zero(2 * N);
    full(b.active) = a;

    FeedbackGains g;
    g.a1 = full.head(N);
    g.a2 = full.tail(N);
    g.alpha1 = Vec::Zero(N);
    g.alpha2 = Vec::Zero(N);
    for (int n = 0; n < N; ++n) {
        if (t.has_g(n)) g.alpha1[n] = t.beta1[n] * g.a1[n] / t.m[n];
        g.alpha2[n] = t.beta2[n] * g.a2[n] / t.m[n];
    }
    g.rotation_omega = t.lambda_shift;
    g.residual = (G * a - rhs).norm();
    g.residual_rel = g.residual / rhs.norm();
    return g;
}

Mat transform_matrix(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t) {
    const int N = t.N;
    Mat T = Mat::Zero(2 * N, 2 * N);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        double ib1 = t.has_g(n) ? 1.0 / t.beta1[n] : 0.0;
        double ib2 = 1.0 / t.beta2[n];
        double a1 = n < g.size() ? g.alpha1[n] : 0.0;
        double a2 = n < g.size() ? g.alpha2[n] : 0.0;
        double in32 = 1.0 / std::pow(t.lambda[n], 1.5);
        // Input p_n and q_n in X^3 coordinates are lambda_n^{3/2} times the coefficient.
        double gp = -a2 * ib1 * in32, hp = a1 * ib2 * in32;
        double gq = a1 * ib1 * in32, hq = a2 * ib2 * in32;
        for (int r = 0; r < 2 * N; ++r) {
            double w = std::sqrt(t.lambda[r % N]);  // X^2 -> X^3 row scaling
            double gc = b.G2(r, n) * w, hc = b.G2(r, N + n) * w;
            T(r, n) = gp * gc + hp * hc;
            T(r, N + n) = gq * gc + hq * hc;
        }
    }
    return T;
}

static void factor(TransformOperator& op) {
    Mat Ta = op.T(op.active, op.active);
    Eigen::BDCSVD<Mat> svd(Ta);
    const Vec& sv = svd.singularValues();
    op.norm = sv[0];
    op.cond = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
    Eigen::PartialPivLU<Mat> lu(Ta);
    op.Tinv = Mat::Zero(op.T.rows(), op.T.cols());
    Mat inv = lu.inverse();
    op.Tinv(op.active, op.active) = inv;
}

TransformOperator assemble_T(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t) {
    TransformOperator op;
    op.N = t.N;
    op.active = b.active;
    op.T = transform_matrix(b, g, t);
    factor(op);
    return op;
}

FeedbackGains tilde_gains(const ModeTable& t) {
    FeedbackGains g;
    g.alpha1 = Vec::Zero(t.N);
    g.alpha2 = Vec::Zero(t.N);
    for (int n = 0; n < t.N; ++n) g.alpha2[n] = t.lambda[n] * t.beta2[n] * t.h[n] / t.m[n];
    g.rotation_omega = t.lambda_shift;
    return g;
}

FredholmSplit fredholm_split(const BasisFamily& b, const FeedbackGains& g, const FeedbackGains& tilde,
                             const ModeTable& t) {
    FredholmSplit f;
    f.Ttilde.N = t.N;
    f.Ttilde.active = b.active;
    f.Ttilde.T = transform_matrix(b, tilde, t);
    factor(f.Ttilde);
    Mat D = transform_matrix(b, g, t) - f.Ttilde.T;
    f.hs = D.colwise().norm().transpose();
    const int N = t.N;
    f.hs_mode.resize(N);
    for (int n = 0; n < N; ++n) f.hs_mode[n] = std::hypot(f.hs[n], f.hs[N + n]);
    double total = f.hs_mode.squaredNorm();
    f.tail_fraction = total > 0 ? f.hs_mode.tail(N - N / 2).squaredNorm() / total : 0.0;
    return f;
}

FredholmSplit fredholm_split(const BasisFamily& b, const FeedbackGains& g, const ModeTable& t) {
    return fredholm_split(b, g, tilde_gains(t), t);
}

Mat skew_matrix(const Vec& eig) {
    const int N = static_cast<int>(eig.size());
    Mat A = Mat::Zero(2 * N, 2 * N);
    for (int k = 0; k < N; ++k) {
        A(k, N + k) = eig[k];
        A(N + k, k) = -eig[k];
    }
    return A;
}

Mat closed_loop_matrix(const ModeTable& t, const FeedbackGains& g) {
    const int N = t.N;
    Mat M = skew_matrix(t.lambda_t);
    int ng = std::min(N, g.size());
    for (int k = 0; k < N; ++k)
        for (int n = 0; n < ng; ++n) {
            M(N + k, n) += t.m[k] * g.alpha1[n];
            M(N + k, N + n) += t.m[k] * g.alpha2[n];
        }
    return M;
}

double static_feedback(const FeedbackGains& g, const SpectralState& x) {
    int n = std::min(g.size(), x.size());
    return g.alpha1.head(n).dot(x.p.head(n)) + g.alpha2.head(n).dot(x.q.head(n));
}

double feedback_value(const FeedbackGains& g, const SpectralState& x, double t) {
    if (g.rotation_omega == 0) return static_feedback(g, x);
    double c = std::cos(g.rotation_omega * t), s = std::sin(g.rotation_omega * t);
    SpectralState r;
    r.p = c * x.p - s * x.q;
    r.q = s * x.p + c * x.q;
    return static_feedback(g, r);
}

double operator_equality_residual(const Mat& T, const FeedbackGains& g, const ModeTable& t,
                                  const SpectralState& x) {
    const int N = t.N;
    Vec u = x.stacked();
    Vec y = closed_loop_matrix(t, g) * u;
    Vec w(2 * N);
    for (int k = 0; k < N; ++k) w[k] = w[N + k] = std::pow(t.lambda[k], 1.5);
    Vec wy = w.cwiseProduct(y);
    double den = wy.norm();
    if (den == 0) return 0;
    Vec lhs = T * wy;
    Vec Tx = T * w.cwiseProduct(u);
    Vec rhs = skew_matrix(t.lambda_t) * Tx - t.lam * Tx;
    return (lhs - rhs).norm() / den;
}

SpectralState strict_domain_state(const SpectralState& x, const FeedbackGains& g) {
    SpectralState y = x;
    int top = -1;
    for (int k = 0; k < x.size(); ++k)
        if (x.p[k] != 0 || x.q[k] != 0) top = k;
    if (top < 1 || top >= g.size()) return y;
    int j1 = top - 1, j2 = top;
    double a = g.alpha1[j1], b = g.alpha1[j2];
    double nn = a * a + b * b;
    if (nn == 0) return y;
    double v = static_feedback(g, x);
    y.p[j1] -= v * a / nn;
    y.p[j2] -= v * b / nn;
    return y;
}

Synthesis synthesize(const DipolarMoment& mu, int N, double lam, bool shifted) {
    Synthesis s;
    s.table = make_mode_table(mu, N, lam, shifted);
    s.tensors = kernel_tensors(s.table);
    s.basis = build_basis(s.table, s.tensors);
    s.gains = solve_tb_eq_b(s.basis, s.table);
    return s;
}

}  // namespace rapidstab
