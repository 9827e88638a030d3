#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>

namespace rapidstab {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

struct LtiSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    double lambda = 1;

    int n() const { return static_cast<int>(A.rows()); }
};

struct SystemCheck {
    bool controllable = false;
    bool simple_spectrum = false;
    bool shift_invertible = false;
    int kalman_rank = 0;
    double min_gap = 0;
    bool ok() const { return controllable && simple_spectrum && shift_invertible; }
};

// Kalman rank with singular values below 1e-10 sigma_max treated as zero.
int numerical_rank(const Eigen::MatrixXd& M, double rel_tol = 1e-10);
SystemCheck check_system(const LtiSystem& sys);

struct FBasis {
    CVec eig;  // eigenvalues lambda_i of A
    CMat V;    // eigenvectors e_i as columns
    CMat F;    // f_i as columns, ((lambda_i + lambda) I - A) f_i = -B
};

// Throws AssumptionViolation when the system check fails or {f_i} is rank deficient.
FBasis build_basis_f(const LtiSystem& sys);

struct FiniteTransform {
    Eigen::MatrixXd T;
    Eigen::RowVectorXd K;
    double imag_T = 0;  // largest imaginary part before symmetrization, relative to |T|
    double imag_K = 0;
};

FiniteTransform solve_finite_tb_eq_b(const LtiSystem& sys, const FBasis& fb);
FiniteTransform finite_transform(const LtiSystem& sys);

struct PoleShiftReport {
    double eig_error = 0;     // multiset distance between eig(A+BK) and eig(A) - lambda
    double identity_rel = 0;  // ||TA + BK - AT + lambda T||_F / ||A||_F
    double tb_residual = 0;   // ||TB - B|| / ||B||
    double similarity_rel = 0;  // ||T(A+BK)T^-1 - (A - lambda)||_F / ||A - lambda||_F
    double cond_T = 0;
    bool T_invertible = false;
};

PoleShiftReport verify_pole_shift(const LtiSystem& sys, const FiniteTransform& tk);

// Greedy nearest matching of two eigenvalue lists; returns the worst distance.
double multiset_distance(const CVec& a, const CVec& b);

// Random controllable system with well separated simple spectrum (real
// eigenvalues and conjugate pairs) and moderately conditioned eigenvectors.
LtiSystem random_system(std::mt19937_64& rng, int n, double lambda);

}  // namespace rapidstab
