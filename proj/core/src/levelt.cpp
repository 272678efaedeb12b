#include "isomono/levelt.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace isomono {

Matrix matrix_exp(const Matrix& M) {
    return M.exp();
}

Matrix matrix_power(const Matrix& M, const CoverPoint& zp) {
    return matrix_exp(M * zp.log());
}

std::pair<std::vector<long>, std::vector<Complex>> levelt_exponents(const std::vector<Complex>& eigs) {
    std::vector<long> d;
    std::vector<Complex> rho;
    d.reserve(eigs.size());
    rho.reserve(eigs.size());
    for (const auto& mu : eigs) {
        if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag()))
            throw std::invalid_argument("levelt_exponents: non-finite eigenvalue");
        long di = static_cast<long>(std::floor(mu.real()));
        d.push_back(di);
        rho.push_back(mu - Complex(double(di), 0.0));
    }
    return {d, rho};
}

Matrix LeveltData::D_matrix() const {
    Matrix M = Matrix::Zero(n(), n());
    for (int i = 0; i < n(); ++i) M(i, i) = double(D[static_cast<std::size_t>(i)]);
    return M;
}

Matrix LeveltData::phi(Complex z) const {
    Matrix P = J0;
    for (const auto& [l, R] : R_by_gap) P += R * std::pow(z, l);
    return P;
}

Matrix LeveltData::monodromy_factor() const {
    return matrix_exp(Complex(0.0, 2.0 * M_PI) * L0);
}

namespace {

bool is_diagonal(const Matrix& J, double tol = 0.0) {
    for (int i = 0; i < J.rows(); ++i)
        for (int j = 0; j < J.cols(); ++j)
            if (i != j && std::abs(J(i, j)) > tol) return false;
    return true;
}

// solve J X - X (J + k I) = -B  (Sylvester, via the Kronecker system)
Matrix solve_sylvester_shift(const Matrix& J, double k, const Matrix& B) {
    const int n = static_cast<int>(J.rows());
    Matrix M = Matrix::Zero(n * n, n * n);
    // vec(JX) = (I kron J) vec(X); vec(X(J + kI)) = ((J + kI)^T kron I) vec(X)
    Matrix Jk = J + k * Matrix::Identity(n, n);
    for (int c = 0; c < n; ++c)
        M.block(c * n, c * n, n, n) = J;
    for (int c = 0; c < n; ++c)
        for (int c2 = 0; c2 < n; ++c2)
            M.block(c * n, c2 * n, n, n) += -Jk(c2, c) * Matrix::Identity(n, n);
    Vector rhs(n * n);
    for (int c = 0; c < n; ++c) rhs.segment(c * n, n) = -B.col(c);
    Vector x = M.partialPivLu().solve(rhs);
    Matrix X(n, n);
    for (int c = 0; c < n; ++c) X.col(c) = x.segment(c * n, n);
    return X;
}

} // namespace

LeveltData levelt_series(const CoalescedSystem& sys, int K) {
    LeveltOptions opt;
    opt.K = K;
    return levelt_series(sys, opt);
}

LeveltData levelt_series(const CoalescedSystem& sys, const LeveltOptions& opt) {
    const int n = sys.n();
    LeveltData lev;
    lev.K = opt.K;

    if (opt.prescribed_GJ) {
        lev.G0 = opt.prescribed_GJ->first;
        lev.J0 = opt.prescribed_GJ->second;
    } else {
        JordanizationResult jr = jordanize(sys.A);
        lev.G0 = jr.T;
        lev.J0 = jr.J;
    }

    std::vector<Complex> mu(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mu[static_cast<std::size_t>(i)] = lev.J0(i, i);

    auto [d, rho] = levelt_exponents(mu);
    lev.D = d;
    lev.S0 = lev.J0 - lev.D_matrix();

    const bool diag = is_diagonal(lev.J0);

    // resonance structure at z=0: gaps mu_i - mu_j = k in N\{0}
    std::vector<std::pair<int, std::pair<int, int>>> gaps;   // (k, (i,j))
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            Complex dmu = mu[static_cast<std::size_t>(i)] - mu[static_cast<std::size_t>(j)];
            long ell = std::lround(dmu.real());
            if (ell > 0 && std::abs(dmu - Complex(double(ell), 0.0)) <= opt.int_tol)
                gaps.push_back({static_cast<int>(ell), {i, j}});
        }
    }
    if (!gaps.empty() && !diag) {
        std::ostringstream os;
        os << "levelt_series: resonant non-diagonalizable structure unsupported (pair "
           << gaps.front().second.first << "," << gaps.front().second.second << " with gap "
           << gaps.front().first << ")";
        throw std::runtime_error(os.str());
    }

    Matrix Lt = lev.G0.partialPivLu().solve(sys.lambda.matrix() * lev.G0);

    lev.F.assign(1, Matrix::Identity(n, n));
    for (int k = 1; k <= opt.K; ++k) {
        // B_k = Lt F_{k-1} - sum_{l<k} F_{k-l} R_l ; solve (ad_J - k) F_k = R_k - B_k
        Matrix B = Lt * lev.F[static_cast<std::size_t>(k) - 1];
        for (const auto& [l, R] : lev.R_by_gap)
            if (l < k) B -= lev.F[static_cast<std::size_t>(k - l)] * R;

        Matrix Fk = Matrix::Zero(n, n);
        if (diag) {
            Matrix Rk = Matrix::Zero(n, n);
            bool has_res = false;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    Complex den = mu[static_cast<std::size_t>(i)] - mu[static_cast<std::size_t>(j)] -
                                  Complex(double(k), 0.0);
                    if (std::abs(den) <= opt.int_tol) {
                        Rk(i, j) = B(i, j);
                        has_res = true;
                    } else {
                        Fk(i, j) = -B(i, j) / den;
                    }
                }
            }
            if (has_res) lev.R_by_gap[k] = Rk;
        } else {
            Fk = solve_sylvester_shift(lev.J0, double(k), B);
        }
        lev.F.push_back(Fk);
    }

    lev.R0 = Matrix::Zero(n, n);
    for (const auto& [l, R] : lev.R_by_gap) lev.R0 += R;
    lev.L0 = lev.S0 + lev.R0;
    return lev;
}

Matrix levelt_eval(const LeveltData& lev, const CoverPoint& zp) {
    return levelt_eval_with_deriv(lev, zp).first;
}

std::pair<Matrix, Matrix> levelt_eval_with_deriv(const LeveltData& lev, const CoverPoint& zp) {
    const int n = lev.n();
    const Complex z = zp.z();
    Matrix S = Matrix::Identity(n, n), Sp = Matrix::Zero(n, n);
    for (int k = 1; k < static_cast<int>(lev.F.size()); ++k) {
        Complex zk = std::pow(z, k - 1);
        Sp += double(k) * lev.F[static_cast<std::size_t>(k)] * zk;
        S += lev.F[static_cast<std::size_t>(k)] * (zk * z);
    }
    Matrix tail = matrix_power(lev.D_matrix(), zp) * matrix_power(lev.L0, zp);
    Matrix Y = lev.G0 * S * tail;
    Matrix Yp = lev.G0 * (Sp + S * lev.phi(z) / z) * tail;
    return {Y, Yp};
}

LeveltCertificate levelt_certify(const LeveltData& lev, const CoalescedSystem& sys, double r_max,
                                 int points, double decade) {
    LeveltCertificate cert;
    const Matrix Lam = sys.lambda.matrix();
    for (int i = 0; i < points; ++i) {
        double r = r_max * std::pow(decade, -double(i) / double(points - 1));
        CoverPoint zp{r, 0.37};   // generic angle off the axes
        auto [Y, Yp] = levelt_eval_with_deriv(lev, zp);
        Complex z = zp.z();
        double res = max_abs(z * Yp - (z * Lam + sys.A) * Y) / std::max(1.0, max_abs(Y));
        cert.radii.push_back(r);
        cert.residuals.push_back(res);
    }
    // least-squares slope of log(res) vs log(r)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = points;
    for (int i = 0; i < m; ++i) {
        double x = std::log(cert.radii[static_cast<std::size_t>(i)]);
        double y = std::log(std::max(cert.residuals[static_cast<std::size_t>(i)], 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    cert.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return cert;
}

ProperLevelt proper_levelt(const std::vector<long>& D, const Matrix& L, double int_tol) {
    const int n = static_cast<int>(L.rows());
    if (static_cast<int>(D.size()) != n)
        throw std::invalid_argument("proper_levelt: D and L size mismatch");

    // rho_i = diagonal of L (S part); group indices with equal rho
    std::vector<Complex> rho(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) rho[static_cast<std::size_t>(i)] = L(i, i);

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    auto rho_eq = [&](int a, int b) {
        return std::abs(rho[static_cast<std::size_t>(a)] - rho[static_cast<std::size_t>(b)]) <= int_tol;
    };
    // stable sort: by rho lexicographically (group), then d non-increasing
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        const Complex& ra = rho[static_cast<std::size_t>(a)];
        const Complex& rb = rho[static_cast<std::size_t>(b)];
        if (!rho_eq(a, b)) {
            if (ra.real() != rb.real()) return ra.real() < rb.real();
            return ra.imag() < rb.imag();
        }
        return D[static_cast<std::size_t>(a)] > D[static_cast<std::size_t>(b)];
    });

    ProperLevelt out;
    out.permutation = perm;
    // columns of Y are permuted, Y -> YP, so L -> P^-1 L P = P^T L P
    Matrix P = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) P(perm[static_cast<std::size_t>(i)], i) = 1.0;
    Matrix Lp = P.transpose() * L * P;

    Matrix Sigma = Matrix::Zero(n, n);
    out.Delta.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        int oi = perm[static_cast<std::size_t>(i)];
        Sigma(i, i) = rho[static_cast<std::size_t>(oi)];
        out.Delta[static_cast<std::size_t>(i)] =
            Complex(double(D[static_cast<std::size_t>(oi)]), 0.0) + rho[static_cast<std::size_t>(oi)];
    }
    out.Sigma = Sigma;
    out.N = Lp - Sigma;

    // structural checks: [Sigma, N] = 0 and N strictly upper triangular
    Matrix comm = Sigma * out.N - out.N * Sigma;
    if (max_abs(comm) > 1e-10 * std::max(1.0, max_abs(L)))
        throw std::runtime_error("proper_levelt: [Sigma, N] != 0 (inconsistent input structure)");
    for (int i = 0; i < n; ++i)
        for (int j = 0; j <= i; ++j)
            if (std::abs(out.N(i, j)) > 1e-10 * std::max(1.0, max_abs(L)))
                throw std::runtime_error("proper_levelt: N not strictly upper triangular");
    return out;
}

Matrix proper_eval(const ProperLevelt& pl, const CoverPoint& zp) {
    const int n = static_cast<int>(pl.N.rows());
    Matrix zDelta = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i)
        zDelta(i, i) = std::exp(pl.Delta[static_cast<std::size_t>(i)] * zp.log());
    // z^N: finite log sum
    Matrix zN = Matrix::Identity(n, n);
    Matrix Nk = Matrix::Identity(n, n);
    double fact = 1.0;
    for (int k = 1; k <= n; ++k) {
        Nk = Nk * pl.N;
        if (max_abs(Nk) == 0.0) break;
        fact *= k;
        zN += Nk * (std::pow(zp.log(), k) / fact);
    }
    return zDelta * zN;
}

} // namespace isomono
