#include "rapidstab/finite_dim.hpp"
#include "rapidstab/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <vector>

namespace rapidstab {

using Eigen::MatrixXd;
using Eigen::VectorXd;

int numerical_rank(const MatrixXd& M, double rel_tol) {
    Eigen::JacobiSVD<MatrixXd> svd(M);
    const VectorXd& s = svd.singularValues();
    if (s.size() == 0 || s[0] == 0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s[i] > rel_tol * s[0]) ++r;
    return r;
}

SystemCheck check_system(const LtiSystem& sys) {
    const int n = sys.n();
    SystemCheck c;
    MatrixXd K(n, n);
    VectorXd v = sys.B;
    for (int j = 0; j < n; ++j) {
        K.col(j) = v;
        v = sys.A * v;
    }
    c.kalman_rank = numerical_rank(K);
    c.controllable = c.kalman_rank == n;

    Eigen::EigenSolver<MatrixXd> es(sys.A, false);
    CVec e = es.eigenvalues();
    double scale = std::max(1.0, e.cwiseAbs().maxCoeff());
    c.min_gap = INFINITY;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) c.min_gap = std::min(c.min_gap, std::abs(e[i] - e[j]));
    c.simple_spectrum = n == 1 || c.min_gap > 1e-8 * scale;

    c.shift_invertible = true;
    for (int i = 0; i < n; ++i) {
        CMat S = (e[i] + sys.lambda) * CMat::Identity(n, n) - sys.A.cast<std::complex<double>>();
        Eigen::JacobiSVD<CMat> svd(S);
        const VectorXd& s = svd.singularValues();
        if (s[n - 1] <= 1e-10 * std::max(1.0, s[0])) c.shift_invertible = false;
    }
    return c;
}

FBasis build_basis_f(const LtiSystem& sys) {
    SystemCheck c = check_system(sys);
    if (!c.controllable) throw AssumptionViolation("(A,B) fails the Kalman rank condition");
    if (!c.simple_spectrum) throw AssumptionViolation("eigenvalues of A are not simple");
    if (!c.shift_invertible) throw AssumptionViolation("(lambda_i + lambda) I - A is singular");
    const int n = sys.n();
    Eigen::EigenSolver<MatrixXd> es(sys.A);
    FBasis fb;
    fb.eig = es.eigenvalues();
    fb.V = es.eigenvectors();
    fb.F.resize(n, n);
    CMat Ac = sys.A.cast<std::complex<double>>();
    CVec Bc = sys.B.cast<std::complex<double>>();
    for (int i = 0; i < n; ++i) {
        CMat S = (fb.eig[i] + sys.lambda) * CMat::Identity(n, n) - Ac;
        fb.F.col(i) = S.partialPivLu().solve(-Bc);
    }
    Eigen::JacobiSVD<CMat> svd(fb.F);
    const VectorXd& s = svd.singularValues();
    if (s[n - 1] <= 1e-10 * s[0]) throw AssumptionViolation("the vectors f_i are linearly dependent");
    return fb;
}

FiniteTransform solve_finite_tb_eq_b(const LtiSystem& sys, const FBasis& fb) {
    const int n = sys.n();
    CVec Bc = sys.B.cast<std::complex<double>>();
    Eigen::PartialPivLU<CMat> vlu(fb.V);
    CVec b = vlu.solve(Bc);
    for (int i = 0; i < n; ++i)
        if (std::abs(b[i]) <= 1e-12 * b.norm())
            throw AssumptionViolation("B has no component along an eigenvector of A");
    // In the eigenbasis F = -V diag(b) C with the Cauchy matrix
    // C_ji = 1/(lambda_i + lambda - lambda_j), so F^{-1} B = -C^{-1} 1 has the
    // closed form below; it avoids solving with the often ill-conditioned F.
    CVec kappa(n);  // K e_i
    for (int i = 0; i < n; ++i) {
        std::complex<double> z = 1;
        for (int j = 0; j < n; ++j) {
            z *= fb.eig[i] + sys.lambda - fb.eig[j];
            if (j != i) z /= fb.eig[i] - fb.eig[j];
        }
        kappa[i] = -z / b[i];
    }
    CMat Vinv = vlu.inverse();
    CMat T = fb.F * kappa.asDiagonal() * Vinv;
    Eigen::RowVectorXcd K = kappa.transpose() * Vinv;

    FiniteTransform out;
    out.T = T.real();  // the conjugate solution solves the same problem; the average is real
    out.K = K.real();
    out.imag_T = T.imag().cwiseAbs().maxCoeff() / std::max(1e-300, T.cwiseAbs().maxCoeff());
    out.imag_K = K.imag().cwiseAbs().maxCoeff() / std::max(1e-300, K.cwiseAbs().maxCoeff());
    return out;
}

FiniteTransform finite_transform(const LtiSystem& sys) {
    if (sys.lambda == 0) {
        // No shift: the f_i are undefined, and T = I, K = 0 solves both equations.
        FiniteTransform ft;
        ft.T = Eigen::MatrixXd::Identity(sys.n(), sys.n());
        ft.K = Eigen::RowVectorXd::Zero(sys.n());
        return ft;
    }
    return solve_finite_tb_eq_b(sys, build_basis_f(sys));
}

double multiset_distance(const CVec& a, const CVec& b) {
    std::vector<bool> used(b.size(), false);
    double worst = 0;
    for (int i = 0; i < a.size(); ++i) {
        int best = -1;
        double bd = INFINITY;
        for (int j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(a[i] - b[j]) < bd) {
                bd = std::abs(a[i] - b[j]);
                best = j;
            }
        if (best < 0) return INFINITY;
        used[best] = true;
        worst = std::max(worst, bd);
    }
    return worst;
}

PoleShiftReport verify_pole_shift(const LtiSystem& sys, const FiniteTransform& tk) {
    const int n = sys.n();
    PoleShiftReport r;
    MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd Acl = sys.A + sys.B * tk.K;
    MatrixXd Ash = sys.A - sys.lambda * I;
    CVec e_cl = Eigen::EigenSolver<MatrixXd>(Acl, false).eigenvalues();
    CVec e_sh = Eigen::EigenSolver<MatrixXd>(Ash, false).eigenvalues();
    r.eig_error = multiset_distance(e_cl, e_sh);
    MatrixXd lhs = tk.T * sys.A + sys.B * tk.K;
    MatrixXd rhs = sys.A * tk.T - sys.lambda * tk.T;
    r.identity_rel = (lhs - rhs).norm() / sys.A.norm();
    r.tb_residual = (tk.T * sys.B - sys.B).norm() / sys.B.norm();
    Eigen::JacobiSVD<MatrixXd> svd(tk.T);
    const VectorXd& s = svd.singularValues();
    r.cond_T = s[n - 1] > 0 ? s[0] / s[n - 1] : INFINITY;
    r.T_invertible = s[n - 1] > 1e-10 * s[0];
    if (r.T_invertible) {
        MatrixXd sim = tk.T * Acl * tk.T.inverse();
        r.similarity_rel = (sim - Ash).norm() / std::max(1e-300, Ash.norm());
    }
    return r;
}

LtiSystem random_system(std::mt19937_64& rng, int n, double lambda) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    std::normal_distribution<double> Nrm(0.0, 1.0);
    for (;;) {
        // Spectrum: conjugate pairs first, then real eigenvalues.
        int pairs = std::uniform_int_distribution<int>(0, n / 2)(rng);
        std::vector<std::complex<double>> ev;
        for (int i = 0; i < pairs; ++i) ev.emplace_back(3 * U(rng), 0.3 + 2.7 * (0.5 + 0.5 * U(rng)));
        for (int i = 2 * pairs; i < n; ++i) ev.emplace_back(3 * U(rng), 0.0);
        std::vector<std::complex<double>> all;
        for (auto z : ev) {
            all.push_back(z);
            if (z.imag() != 0) all.push_back(std::conj(z));
        }
        bool ok = true;
        for (std::size_t i = 0; i < all.size() && ok; ++i)
            for (std::size_t j = 0; j < all.size() && ok; ++j) {
                if (i != j && std::abs(all[i] - all[j]) < 0.3) ok = false;
                if (std::abs(all[i] + lambda - all[j]) < 0.2) ok = false;
            }
        if (!ok) continue;

        MatrixXd D = MatrixXd::Zero(n, n);
        int r = 0;
        for (auto z : ev) {
            if (z.imag() != 0) {
                D(r, r) = D(r + 1, r + 1) = z.real();
                D(r, r + 1) = z.imag();
                D(r + 1, r) = -z.imag();
                r += 2;
            } else {
                D(r, r) = z.real();
                r += 1;
            }
        }
        MatrixXd S(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) S(i, j) = (i == j ? 1.0 : 0.0) + 0.3 * Nrm(rng);
        if (numerical_rank(S) < n) continue;
        Eigen::JacobiSVD<MatrixXd> svd(S);
        if (svd.singularValues()[0] / svd.singularValues()[n - 1] > 10) continue;

        LtiSystem sys;
        sys.A = S * D * S.inverse();
        sys.B.resize(n);
        for (int i = 0; i < n; ++i) sys.B[i] = Nrm(rng);
        sys.lambda = lambda;
        if (!check_system(sys).ok()) continue;
        Eigen::EigenSolver<MatrixXd> es(sys.A);
        CVec b = es.eigenvectors().partialPivLu().solve(sys.B.cast<std::complex<double>>());
        if (b.cwiseAbs().minCoeff() < 0.1 * b.norm() / std::sqrt(double(n))) continue;
        return sys;
    }
}

}  // namespace rapidstab
