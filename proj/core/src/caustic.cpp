#include "isomono/caustic.hpp"

#include <cmath>

namespace isomono {

void CausticModel::validate() const {
    if (m < 2) throw std::invalid_argument("CausticModel: m must be >= 2");
    if (n < 3) throw std::invalid_argument("CausticModel: need n >= 3");
    Complex e11 = eta11(Complex(0, 0), Complex(0, 0));
    Complex e12 = eta12(Complex(0, 0), Complex(0, 0));
    if (m >= 3 && std::abs(e12) == 0.0)
        throw std::invalid_argument("CausticModel: eta12 must be nonzero at t2 = 0 for m >= 3");
    if (m == 2 && std::abs(e12 * e12 - e11 * e11) == 0.0)
        throw std::invalid_argument("CausticModel: degenerate metric at t2 = 0 (m = 2)");
}

std::pair<Complex, Complex> caustic_coords(Complex t1, Complex t2, int m) {
    Complex w = (2.0 / double(m)) * std::pow(t2, double(m) / 2.0);
    return {t1 + w, t1 - w};
}

std::pair<Complex, Complex> caustic_coords_inverse(Complex u1, Complex u2, int m) {
    Complex t1 = 0.5 * (u1 + u2);
    Complex t2 = std::pow(0.25 * double(m) * (u1 - u2), 2.0 / double(m));
    return {t1, t2};
}

Matrix caustic_U_hat(Complex t1, Complex t2, int m) {
    Matrix U(2, 2);
    U << t1, (2.0 / double(m)) * std::pow(t2, double(m - 1)), (2.0 / double(m)) * t2, t1;
    return U;
}

namespace {

struct PsiParts {
    Complex a, b, f, g;
    Matrix Psi_hat, Psi_hat_inv;
};

PsiParts psi_parts(const CausticModel& model, Complex t1, Complex t2) {
    PsiParts p;
    const double m = model.m;
    Complex e11 = model.eta11(t1, t2), e12 = model.eta12(t1, t2);
    Complex tpow = std::pow(t2, (m - 2.0) / 2.0);
    p.a = std::sqrt(e12 + tpow * e11);
    p.b = std::sqrt(e12 - tpow * e11);
    p.f = std::pow(t2, (2.0 - m) / 4.0);
    p.g = std::pow(t2, (m - 2.0) / 4.0);
    const Complex i(0.0, 1.0);
    const double s2 = std::sqrt(2.0);
    p.Psi_hat = Matrix(2, 2);
    p.Psi_hat << p.a * p.f / s2, p.a * p.g / s2, i * p.b * p.f / s2, -i * p.b * p.g / s2;
    p.Psi_hat_inv = Matrix(2, 2);
    p.Psi_hat_inv << p.g / p.a / s2, -i * p.g / p.b / s2, p.f / p.a / s2, i * p.f / p.b / s2;
    return p;
}

Matrix embed_psi(const PsiParts& p, int n) {
    Matrix Psi = Matrix::Identity(n, n);
    Psi.block(0, 0, 2, 2) = p.Psi_hat;
    return Psi;
}

Matrix embed_psi_inv(const PsiParts& p, int n) {
    Matrix Psi = Matrix::Identity(n, n);
    Psi.block(0, 0, 2, 2) = p.Psi_hat_inv;
    return Psi;
}

} // namespace

CausticPsi caustic_psi(const CausticModel& model, Complex t1, Complex t2,
                       const std::vector<Complex>& u_rest) {
    model.validate();
    if (t2 == Complex(0.0, 0.0) && model.m >= 3)
        throw std::invalid_argument("caustic_psi: t2 = 0 is singular for m >= 3");
    const int n = model.n;
    if (static_cast<int>(u_rest.size()) != 0 && static_cast<int>(u_rest.size()) != n - 2)
        throw std::invalid_argument("caustic_psi: expected n-2 extra canonical coordinates");

    PsiParts p = psi_parts(model, t1, t2);
    CausticPsi out;
    out.a = p.a;
    out.b = p.b;
    out.Psi = embed_psi(p, n);

    // Gram certificate against the metric block
    Complex e11 = model.eta11(t1, t2), e12 = model.eta12(t1, t2);
    Matrix gram(2, 2);
    gram << e11, e12, e12, std::pow(t2, double(model.m - 2)) * e11;
    Matrix G2 = p.Psi_hat.transpose() * p.Psi_hat;
    out.gram_residual = max_abs(Matrix(G2 - gram));

    // diagonalization certificate Psi U Psi^-1 = diag(u1, u2, u_rest)
    auto [u1, u2] = caustic_coords(t1, t2, model.m);
    Matrix U = Matrix::Zero(n, n);
    U.block(0, 0, 2, 2) = caustic_U_hat(t1, t2, model.m);
    for (int k = 0; k + 2 < n; ++k)
        U(k + 2, k + 2) = k < static_cast<int>(u_rest.size()) ? u_rest[static_cast<std::size_t>(k)]
                                                              : Complex(double(k + 2), 0.0);
    Matrix Dg = out.Psi * U * embed_psi_inv(p, n);
    Matrix expect = Matrix::Zero(n, n);
    expect(0, 0) = u1;
    expect(1, 1) = u2;
    for (int k = 2; k < n; ++k) expect(k, k) = U(k, k);
    out.diagonalization_residual = max_abs(Matrix(Dg - expect));
    return out;
}

Matrix caustic_v11_limit(const CausticModel& model, Complex t1) {
    model.validate();
    Complex e11 = model.eta11(t1, Complex(0.0, 0.0));
    Complex e12 = model.eta12(t1, Complex(0.0, 0.0));
    const Complex i(0.0, 1.0);
    const Complex v = model.v12_ring();
    Matrix B(2, 2);
    if (model.m >= 3) {
        B << e12, Complex(0.0, 0.0), -e11, -e12;
        return (i * v / std::sqrt(e12 * e12)) * B;
    }
    Complex den = std::sqrt(e12 * e12 - e11 * e11);
    B << e12, e11, -e11, -e12;
    return (i * v / den) * B;
}

CausticRestricted caustic_restricted_system(const CausticModel& model, Complex t1,
                                            const std::vector<Complex>& u_rest,
                                            const Matrix& offdiag, Complex c1, Complex c2) {
    model.validate();
    const int n = model.n;
    if (static_cast<int>(u_rest.size()) != n - 2)
        throw std::invalid_argument("caustic_restricted_system: expected n-2 coordinates");
    if (offdiag.rows() != n || offdiag.cols() != n)
        throw std::invalid_argument("caustic_restricted_system: off-diagonal data must be n x n");
    if (c1 == Complex(0.0, 0.0) || c2 == Complex(0.0, 0.0))
        throw std::invalid_argument("caustic_restricted_system: c1, c2 must be nonzero");

    std::vector<int> sizes{2};
    for (int k = 0; k < n - 2; ++k) sizes.push_back(1);
    BlockPartition part(sizes);

    std::vector<Complex> lam{t1};
    lam.insert(lam.end(), u_rest.begin(), u_rest.end());
    Lambda lambda(lam, part);

    Matrix A = block_offdiagonal_part(offdiag, part);
    A.block(0, 0, 2, 2) = caustic_v11_limit(model, t1);

    CoalescedSystem sys(lambda, A);
    CausticRestricted out{sys, build_pfaffian(sys), Matrix(), Matrix()};

    Complex e11 = model.eta11(t1, Complex(0.0, 0.0));
    Complex e12 = model.eta12(t1, Complex(0.0, 0.0));
    Matrix T1(2, 2);
    if (model.m >= 3) {
        T1 << c1 / std::sqrt(e12), Complex(0.0, 0.0),
            -0.5 * c1 * e11 / std::pow(std::sqrt(e12), 3), c2 / std::sqrt(e12);
    } else {
        // m = 2: V11 block vanishes; any solution of the T1-system works
        const Complex i(0.0, 1.0);
        const double s2 = std::sqrt(2.0);
        T1 = Matrix(2, 2);
        T1 << 1.0 / (s2 * std::sqrt(e12 + e11)), -i / (s2 * std::sqrt(e12 - e11)),
            1.0 / (s2 * std::sqrt(e12 + e11)), i / (s2 * std::sqrt(e12 - e11));
    }
    out.T1 = T1;
    Matrix T = Matrix::Identity(n, n);
    T.block(0, 0, 2, 2) = T1;
    out.T = T;
    return out;
}

namespace {

// canonical one-form coefficient V_j (pairwise-distinct case) from the matrix
// V and coordinates u
Matrix canonical_vj(const Matrix& V, const std::vector<Complex>& u, int j) {
    const int n = static_cast<int>(V.rows());
    Matrix W = Matrix::Zero(n, n);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            double dja = a == j ? 1.0 : 0.0;
            double djb = b == j ? 1.0 : 0.0;
            if (dja == djb) continue;
            W(a, b) = V(a, b) * (dja - djb) / (u[static_cast<std::size_t>(a)] - u[static_cast<std::size_t>(b)]);
        }
    }
    return W;
}

} // namespace

Matrix caustic_conjugated_field(const CausticModel& model, Complex t1, Complex t2,
                                const std::vector<Complex>& u_rest, const Matrix& offdiag, int j) {
    model.validate();
    const int n = model.n;
    if (j < 2 || j > n) throw std::out_of_range("caustic_conjugated_field: j in 2..n");

    // the t2 = 0 matrix (constant holomorphic model for the conjugated field)
    std::vector<int> sizes{2};
    for (int k = 0; k < n - 2; ++k) sizes.push_back(1);
    BlockPartition part(sizes);
    Matrix A = block_offdiagonal_part(offdiag, part);
    A.block(0, 0, 2, 2) = caustic_v11_limit(model, t1);

    PsiParts p = psi_parts(model, t1, t2);
    Matrix Psi = embed_psi(p, n), PsiInv = embed_psi_inv(p, n);
    Matrix V = Psi * A * PsiInv;

    auto [u1, u2] = caustic_coords(t1, t2, model.m);
    std::vector<Complex> u{u1, u2};
    u.insert(u.end(), u_rest.begin(), u_rest.end());

    Matrix Vj;
    if (j == 2)
        Vj = canonical_vj(V, u, 0) + canonical_vj(V, u, 1);
    else
        Vj = canonical_vj(V, u, j - 1);
    return PsiInv * Vj * Psi;
}

VringScan vring_scan(const CausticModel& model, const std::vector<Complex>& candidates,
                     const std::vector<double>& t2_grid, double fit_tol) {
    model.validate();
    VringScan scan;
    scan.grid = t2_grid;
    const int n = model.n;
    const double m = model.m;
    const Complex i(0.0, 1.0);
    const double s2 = std::sqrt(2.0);

    // fixed holomorphic couplings to the u_3.. directions
    auto coup = [](int r, int c) { return Complex(0.4 + 0.1 * r, 0.2 - 0.05 * c); };

    for (const Complex& cand : candidates) {
        std::vector<double> norms;
        for (double t2r : t2_grid) {
            Complex t1(0.0, 0.0), t2(t2r, 0.0);
            PsiParts p = psi_parts(model, t1, t2);
            auto [u1, u2] = caustic_coords(t1, t2, model.m);
            std::vector<Complex> u{u1, u2};
            for (int k = 0; k + 2 < n; ++k) u.push_back(Complex(1.5 + k, 0.0));

            // V entries: V12 = candidate; mixed entries via the Psi relations
            Matrix V = Matrix::Zero(n, n);
            V(0, 1) = cand;
            V(1, 0) = -cand;
            for (int k = 2; k < n; ++k) {
                Complex c1k = coup(1, k), c2k = coup(2, k), ck1 = coup(k, 1), ck2 = coup(k, 2);
                V(0, k) = (p.a / s2) * (p.f * c1k + p.g * c2k);
                V(1, k) = (i * p.b / s2) * (p.f * c1k - p.g * c2k);
                V(k, 0) = (p.g * ck1 + p.f * ck2) / (s2 * p.a);
                V(k, 1) = (i / (s2 * p.b)) * (p.f * ck2 - p.g * ck1);
            }
            Matrix V1mV2 = canonical_vj(V, u, 0) - canonical_vj(V, u, 1);

            // analytic dPsi/dt2
            Complex e11 = model.eta11(t1, t2), e12 = model.eta12(t1, t2);
            Complex de11 = model.eta11_dt2(t1, t2), de12 = model.eta12_dt2(t1, t2);
            Complex tpow = std::pow(t2, (m - 2.0) / 2.0);
            Complex dtpow = t2r > 0 ? Complex((m - 2.0) / 2.0, 0.0) * std::pow(t2, (m - 4.0) / 2.0)
                                    : Complex(0.0, 0.0);
            Complex da = (de12 + dtpow * e11 + tpow * de11) / (2.0 * p.a);
            Complex db = (de12 - dtpow * e11 - tpow * de11) / (2.0 * p.b);
            Complex df = ((2.0 - m) / 4.0) * p.f / t2;
            Complex dg = ((m - 2.0) / 4.0) * p.g / t2;
            Matrix dPsiHat(2, 2);
            dPsiHat << (da * p.f + p.a * df) / s2, (da * p.g + p.a * dg) / s2,
                i * (db * p.f + p.b * df) / s2, -i * (db * p.g + p.b * dg) / s2;

            Matrix Mfull = std::pow(t2, (m - 2.0) / 2.0) *
                           (embed_psi_inv(p, n) * V1mV2 * embed_psi(p, n));
            Mfull.block(0, 0, 2, 2) -= p.Psi_hat_inv * dPsiHat;
            norms.push_back(max_abs(Mfull));
        }
        // slope of log||M|| against log(1/t2)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const int q = static_cast<int>(t2_grid.size());
        for (int k = 0; k < q; ++k) {
            double x = std::log(1.0 / t2_grid[static_cast<std::size_t>(k)]);
            double y = std::log(std::max(norms[static_cast<std::size_t>(k)], 1e-300));
            sx += x; sy += y; sxx += x * x; sxy += x * y;
        }
        double slope = (q * sxy - sx * sy) / (q * sxx - sx * sx);
        scan.verdicts.push_back({cand, slope, slope <= fit_tol});
    }
    return scan;
}

} // namespace isomono
