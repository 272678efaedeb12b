#include "isomono/showcase.hpp"

namespace isomono {

Matrix example3d_closed_form(const ThreeDExample& ex, Complex x) {
    ex.validate();
    if (x == Complex(0.0, 0.0)) throw std::invalid_argument("example3d: x = 0");
    const Complex rho = ex.rho();
    const Complex xr = std::pow(x, rho), xmr = std::pow(x, -rho);
    const Complex s = std::sqrt(ex.A23 / ex.A32);
    Matrix A = Matrix::Zero(3, 3);
    A(0, 1) = ex.c1 * xr + ex.c2 * xmr;
    A(0, 2) = s * (ex.c1 * xr - ex.c2 * xmr);
    A(1, 0) = ex.c3 * xr + ex.c4 * xmr;
    A(2, 0) = -(ex.c3 * xr - ex.c4 * xmr) / s;
    A(1, 2) = ex.A23;
    A(2, 1) = ex.A32;
    return A;
}

Matrix example3d_T0_particular(const ThreeDExample& ex) {
    ex.validate();
    const Complex q = ex.A23 / std::sqrt(ex.A23 * ex.A32);
    Matrix T = Matrix::Zero(3, 3);
    T(0, 0) = 1.0;
    T(1, 1) = q;
    T(1, 2) = -q;
    T(2, 1) = 1.0;
    T(2, 2) = 1.0;
    return T;
}

Matrix example3d_T(const ThreeDExample& ex, Complex x) {
    if (x == Complex(0.0, 0.0)) throw std::invalid_argument("example3d_T: x = 0");
    const Complex rho = ex.rho();
    Matrix B = Matrix::Zero(3, 3);
    B(0, 0) = ex.a0;
    B(1, 1) = ex.b0 * std::pow(x, rho) * ex.a0;
    B(2, 2) = ex.c0 * std::pow(x, -rho) * ex.a0;
    return example3d_T0_particular(ex) * B;
}

Matrix example3d_D_of_x(const ThreeDExample& ex, Complex x) {
    if (x == Complex(0.0, 0.0)) throw std::invalid_argument("example3d_D_of_x: x = 0");
    const Complex rho = ex.rho();
    Matrix Bdot = Matrix::Zero(3, 3);
    Bdot(1, 1) = rho / x;
    Bdot(2, 2) = -rho / x;
    Matrix T0 = example3d_T0_particular(ex);
    return T0 * Bdot * T0.partialPivLu().inverse();
}

CoalescedSystem example3d_system(const ThreeDExample& ex, Complex x, DSpec dspec) {
    Lambda lam({x, Complex(0.0, 0.0)}, ex.partition());
    return CoalescedSystem(lam, example3d_closed_form(ex, x), std::move(dspec));
}

Matrix example3d_omega1(const Matrix& A, Complex x) {
    Matrix w = Matrix::Zero(3, 3);
    w(0, 1) = A(0, 1);
    w(0, 2) = A(0, 2);
    w(1, 0) = A(1, 0);
    w(2, 0) = A(2, 0);
    return w / x;
}

// ---- 4d ----------------------------------------------------------------------

Matrix omega_hat_4d(const Matrix& A4, Complex x) {
    if (x == Complex(0.0, 0.0) || x == Complex(1.0, 0.0))
        throw std::invalid_argument("omega_hat_4d: x in {0, 1}");
    if (A4.rows() != 4 || A4.cols() != 4)
        throw std::invalid_argument("omega_hat_4d: need a 4x4 matrix");
    Matrix w = Matrix::Zero(4, 4);
    // partition (2,1,1): blocks [1,2] <-> rows 0..1 col 2, [2,3] <-> (2,3)
    w(0, 2) = A4(0, 2) / x;
    w(1, 2) = A4(1, 2) / x;
    w(2, 0) = A4(2, 0) / x;
    w(2, 1) = A4(2, 1) / x;
    w(2, 3) = A4(2, 3) / (x - 1.0);
    w(3, 2) = A4(3, 2) / (x - 1.0);
    return w;
}

Matrix flow4d_rhs(const Matrix& A4, Complex x) {
    Matrix w = omega_hat_4d(A4, x);
    return w * A4 - A4 * w;
}

Matrix flow4d_integrate(Matrix A0, double x0, double x1, double rtol, OdeStats* stats) {
    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = 1e-16;
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
        Matrix A = Eigen::Map<const Matrix>(y.data(), 4, 4);
        Matrix dA = flow4d_rhs(A, Complex(t, 0.0));
        dy = Eigen::Map<const Vector>(dA.data(), 16);
    };
    Vector y = Eigen::Map<const Vector>(A0.data(), 16);
    y = integrate_ode(rhs, x0, x1, y, oo, stats);
    return Eigen::Map<const Matrix>(y.data(), 4, 4);
}

Matrix skew4_from_phis(const std::array<Complex, 5>& phi) {
    Matrix N = Matrix::Zero(4, 4);
    N(0, 2) = phi[0];
    N(1, 2) = phi[1];
    N(0, 3) = phi[2];
    N(1, 3) = phi[3];
    N(2, 3) = phi[4];
    return N - N.transpose();
}

// ---- Omega system ---------------------------------------------------------------

std::array<Complex, 3> pvi_rhs(const OmegaState& st) {
    const Complex& x = st.x;
    if (x == Complex(0.0, 0.0) || x == Complex(1.0, 0.0))
        throw std::invalid_argument("pvi_rhs: x in {0, 1}");
    return {st.O2 * st.O3 / x, st.O1 * st.O3 / (1.0 - x), st.O1 * st.O2 / (x * (x - 1.0))};
}

OmegaState pvi_integrate(OmegaState st, Complex x1, double rtol, OdeStats* stats) {
    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = 1e-16;
    const Complex x0 = st.x;
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
        OmegaState s{y(0), y(1), y(2), x0 + t * (x1 - x0)};
        auto d = pvi_rhs(s);
        dy.resize(3);
        dy(0) = d[0] * (x1 - x0);
        dy(1) = d[1] * (x1 - x0);
        dy(2) = d[2] * (x1 - x0);
    };
    Vector y(3);
    y << st.O1, st.O2, st.O3;
    y = integrate_ode(rhs, 0.0, 1.0, y, oo, stats);
    return {y(0), y(1), y(2), x1};
}

OmegaState omega_from_phis(const std::array<Complex, 5>& phi, Complex x) {
    const Complex i(0.0, 1.0);
    const double s2 = std::sqrt(2.0);
    return {-i * phi[4], s2 * phi[0], i * s2 * phi[2], x};
}

} // namespace isomono
