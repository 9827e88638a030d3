#include "rapidstab/basis.hpp"
#include "rapidstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace rapidstab {

void beta_coefficients(ModeTable& t) {
    const double l = t.lam;
    t.beta1 = Vec::Zero(t.N);
    t.beta2 = Vec::Zero(t.N);
    for (int n = 0; n < t.N; ++n) {
        if (t.m[n] == 0)
            throw HypothesisViolation("zero moment at k=" + std::to_string(n + 1), n + 1, 0.0);
        // The shifted eigenvalue enters the kernel; the plain one fixes the
        // normalization <g_n^12, phi_n> = 1/lambda_n.
        double ln = t.lambda[n], lt = t.lambda_t[n];
        double num = l * (l * l + 4 * lt * lt);
        if (t.has_g(n)) t.beta1[n] = num / (2 * lt * lt * ln * t.m[n]);
        t.beta2[n] = -num / ((l * l + 2 * lt * lt) * ln * t.m[n]);
    }
}

static void fill_entry(KernelTensor& kt, const ModeTable& t, int n, int k) {
    const double l = t.lam, l2 = l * l;
    double ln = t.lambda_t[n], lk = t.lambda_t[k];
    double d = (l2 + (lk - ln) * (lk - ln)) * (l2 + (lk + ln) * (lk + ln));
    kt.delta(n, k) = d;
    kt.c11(n, k) = lk * (ln * ln - l2 - lk * lk) / d;
    kt.c12(n, k) = 2 * l * lk * ln / d;
    kt.c21(n, k) = -l * (l2 + lk * lk + ln * ln) / d;
    kt.c22(n, k) = ln * (l2 - lk * lk + ln * ln) / d;
    kt.d11(n, k) = -kt.c12(n, k);
    kt.d12(n, k) = kt.c11(n, k);
    kt.d21(n, k) = -kt.c22(n, k);
    kt.d22(n, k) = kt.c21(n, k);
}

static KernelTensor allocate(int N) {
    KernelTensor kt;
    kt.N = N;
    for (Mat* m : {&kt.delta, &kt.c11, &kt.c12, &kt.c21, &kt.c22, &kt.d11, &kt.d12, &kt.d21, &kt.d22})
        m->resize(N, N);
    return kt;
}

KernelTensor kernel_tensors_serial(const ModeTable& t) {
    KernelTensor kt = allocate(t.N);
    for (int n = 0; n < t.N; ++n)
        for (int k = 0; k < t.N; ++k) fill_entry(kt, t, n, k);
    return kt;
}

KernelTensor kernel_tensors_omp(const ModeTable& t) {
    KernelTensor kt = allocate(t.N);
    const int N = t.N;
#pragma omp parallel for collapse(2) schedule(static)
    for (int k = 0; k < N; ++k)
        for (int n = 0; n < N; ++n) fill_entry(kt, t, n, k);
    return kt;
}

KernelTensor kernel_tensors(const ModeTable& t) { return kernel_tensors_omp(t); }

Eigen::Matrix4d coupling_matrix(const ModeTable& t, int n, int k) {
    double l = t.lam, ln = t.lambda_t[n - 1], lk = t.lambda_t[k - 1];
    Eigen::Matrix4d A;
    A << -lk, 0, -l, ln,
         0, -lk, -ln, -l,
         l, -ln, -lk, 0,
         ln, l, 0, -lk;
    return A;
}

BasisFamily build_basis(const ModeTable& t, const KernelTensor& kt) {
    const int N = t.N;
    BasisFamily b;
    b.N = N;
    b.shifted = t.shifted();
    b.G2 = Mat::Zero(2 * N, 2 * N);
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < N; ++k) {
            double lk = t.lambda[k];
            if (t.has_g(n)) {
                double s = t.beta1[n] * t.m[k] * lk;
                b.G2(k, n) = kt.c12(n, k) * s;
                b.G2(N + k, n) = kt.c22(n, k) * s;
            }
            double s2 = t.beta2[n] * t.m[k] * lk;
            b.G2(k, N + n) = kt.d12(n, k) * s2;
            b.G2(N + k, N + n) = kt.d22(n, k) * s2;
        }
    }
    Vec r(2 * N);
    r << t.lambda.cwiseSqrt(), t.lambda.cwiseSqrt();
    b.G3 = r.asDiagonal() * b.G2 * r.cwiseInverse().asDiagonal();
    for (int i = 0; i < 2 * N; ++i)
        if (!(b.shifted && i == 0)) b.active.push_back(i);
    return b;
}

std::pair<Vec, Vec> normalization_values(const ModeTable& t, const KernelTensor& kt) {
    Vec g(t.N), h(t.N);
    for (int n = 0; n < t.N; ++n) {
        g[n] = t.has_g(n) ? kt.c12(n, n) * t.beta1[n] * t.m[n] : NAN;
        h[n] = kt.d22(n, n) * t.beta2[n] * t.m[n];
    }
    return {g, h};
}

Mat gram_serial(const Mat& G) {
    const int c = static_cast<int>(G.cols()), r = static_cast<int>(G.rows());
    Mat S(c, c);
    for (int i = 0; i < c; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0;
            for (int k = 0; k < r; ++k) s += G(k, i) * G(k, j);
            S(i, j) = S(j, i) = s;
        }
    return S;
}

Mat gram_omp(const Mat& G) {
    const int c = static_cast<int>(G.cols()), r = static_cast<int>(G.rows());
    Mat S(c, c);
#pragma omp parallel for schedule(dynamic, 8)
    for (int i = 0; i < c; ++i)
        for (int j = 0; j <= i; ++j) {
            double s = 0;
            for (int k = 0; k < r; ++k) s += G(k, i) * G(k, j);
            S(i, j) = S(j, i) = s;
        }
    return S;
}

FrameBounds frame_bounds(const Mat& G) {
    Eigen::SelfAdjointEigenSolver<Mat> es(gram_omp(G), Eigen::EigenvaluesOnly);
    FrameBounds f;
    f.sigma_min = es.eigenvalues().minCoeff();
    f.sigma_max = es.eigenvalues().maxCoeff();
    f.near_singular = f.sigma_min < 1e-10 * f.sigma_max;
    return f;
}

FrameBounds frame_bounds(const BasisFamily& b, int s) {
    const Mat& G = (s == 3) ? b.G3 : b.G2;
    return frame_bounds(G(b.active, b.active));
}

TailReport closeness_tails(const Mat& G, const std::vector<int>& active) {
    const int N = static_cast<int>(G.cols() / 2);
    Vec r = Vec::Zero(2 * N);
    for (int c : active) {
        double s = 0;
        for (int i : active) {
            double e = (i == c ? 1.0 : 0.0) - G(i, c);
            s += e * e;
        }
        r[c] = s;
    }
    TailReport t;
    t.M = {N / 4, N / 2, N};
    for (int j = 0; j < 3; ++j) {
        t.S_g[j] = r.head(t.M[j]).sum();
        t.S_h[j] = r.segment(N, t.M[j]).sum();
    }
    return t;
}

TailReport closeness_tails(const BasisFamily& b, int s) {
    return closeness_tails(s == 3 ? b.G3 : b.G2, b.active);
}

}  // namespace rapidstab
