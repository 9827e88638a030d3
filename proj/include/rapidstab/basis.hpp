#pragma once

#include "rapidstab/moment.hpp"

#include <array>
#include <vector>

namespace rapidstab {

// Fills t.beta1 and t.beta2 from t.lam, t.lambda, t.lambda_t and t.m.
void beta_coefficients(ModeTable& t);

// Fourier coefficients of the g and h families before the beta_n m_k factor.
// Entry (n-1, k-1) belongs to the pair (n, k).
struct KernelTensor {
    int N = 0;
    Mat delta;
    Mat c11, c12, c21, c22;
    Mat d11, d12, d21, d22;
};

KernelTensor kernel_tensors(const ModeTable& t);
KernelTensor kernel_tensors_serial(const ModeTable& t);
KernelTensor kernel_tensors_omp(const ModeTable& t);

// The 4x4 matrix whose determinant is delta_nk (1-based n, k, shifted eigenvalues).
Eigen::Matrix4d coupling_matrix(const ModeTable& t, int n, int k);

// Basis columns: column n-1 is (g_n^12, g_n^22), column N+n-1 is (h_n^12, h_n^22).
struct BasisFamily {
    int N = 0;
    bool shifted = false;
    Mat G2;  // X^2 coordinates, row k scaled by lambda_k
    Mat G3;  // X^3 coordinates of the columns divided by lambda_n^{1/2}
    std::vector<int> active;  // coordinates that take part (drops p_1 when shifted)
};

BasisFamily build_basis(const ModeTable& t, const KernelTensor& kt);

// <g_n^12, phi_n> and <h_n^22, phi_n> for every n (NaN for a missing g_n).
std::pair<Vec, Vec> normalization_values(const ModeTable& t, const KernelTensor& kt);

Mat gram_serial(const Mat& G);
Mat gram_omp(const Mat& G);

struct FrameBounds {
    double sigma_min = 0;
    double sigma_max = 0;
    bool near_singular = false;
};

// Extreme eigenvalues of the Gram matrix of the active columns (s = 2 or 3).
FrameBounds frame_bounds(const BasisFamily& b, int s);
FrameBounds frame_bounds(const Mat& G);

// Partial sums of squared distances between basis columns and the unit
// coordinate vectors, at M = N/4, N/2, N.
struct TailReport {
    std::array<int, 3> M{};
    std::array<double, 3> S_g{};
    std::array<double, 3> S_h{};
};

TailReport closeness_tails(const BasisFamily& b, int s);
TailReport closeness_tails(const Mat& G, const std::vector<int>& active);

}  // namespace rapidstab
