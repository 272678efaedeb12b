#include "isomono/ode.hpp"

#include <cmath>

namespace isomono {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace

Vector integrate_ode(const OdeRhs& f, double t0, double t1, Vector y, const OdeOptions& opt,
                     OdeStats* stats, const OdeObserver& observer) {
    const double span = t1 - t0;
    if (span == 0.0) return y;
    const double dir = span > 0 ? 1.0 : -1.0;
    const Eigen::Index n = y.size();

    Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), y5(n), err(n);
    OdeStats st;

    double t = t0;
    f(t, y, k1);
    ++st.rhs_evaluations;

    double h = opt.initial_step;
    if (h == 0.0) {
        double ny = y.norm(), nd = k1.norm();
        h = 0.01 * (nd > 0 ? std::max(1e-10, ny) / nd : 1.0);
        h = std::min(h, std::abs(span));
    }
    h *= dir;

    const double hmin = opt.min_step_factor * std::abs(span);

    while ((t - t1) * dir < 0) {
        if (std::abs(h) > std::abs(t1 - t)) h = t1 - t;
        if (st.accepted + st.rejected > opt.max_steps)
            throw std::runtime_error("integrate_ode: step budget exhausted");
        if (std::abs(h) < hmin)
            throw std::runtime_error("integrate_ode: step size collapse");

        yt = y + h * (a21 * k1);
        f(t + c2 * h, yt, k2);
        yt = y + h * (a31 * k1 + a32 * k2);
        f(t + c3 * h, yt, k3);
        yt = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        f(t + c4 * h, yt, k4);
        yt = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        f(t + c5 * h, yt, k5);
        yt = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        f(t + h, yt, k6);
        y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        f(t + h, y5, k7);
        st.rhs_evaluations += 6;

        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double errnorm = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
            double q = std::abs(err(i)) / sc;
            errnorm += q * q;
        }
        errnorm = std::sqrt(errnorm / double(n));

        if (errnorm <= 1.0) {
            t += h;
            y.swap(y5);
            k1.swap(k7);   // FSAL
            ++st.accepted;
            if (observer) observer(t, y);
        } else {
            ++st.rejected;
        }
        double fac = 0.9 * std::pow(std::max(errnorm, 1e-30), -0.2);
        fac = std::min(5.0, std::max(0.2, fac));
        h *= fac;
    }
    if (stats) *stats += st;
    return y;
}

namespace {

Vector vec(const Matrix& M) {
    return Eigen::Map<const Vector>(M.data(), M.size());
}

Matrix unvec(const Vector& v, Eigen::Index r, Eigen::Index c) {
    return Eigen::Map<const Matrix>(v.data(), r, c);
}

} // namespace

Matrix integrate_matrix_ode_path(const MatrixCoeff& C, const std::vector<Complex>& zpath,
                                 Matrix Y0, const OdeOptions& opt, OdeStats* stats) {
    const Eigen::Index r = Y0.rows(), c = Y0.cols();
    Vector y = vec(Y0);
    for (std::size_t seg = 0; seg + 1 < zpath.size(); ++seg) {
        const Complex za = zpath[seg], zb = zpath[seg + 1];
        if (za == zb) continue;
        auto rhs = [&](double t, const Vector& v, Vector& dv) {
            Complex z = za + t * (zb - za);
            Matrix Y = unvec(v, r, c);
            Matrix dY = (zb - za) * (C(z) * Y);
            dv = vec(dY);
        };
        y = integrate_ode(rhs, 0.0, 1.0, y, opt, stats);
    }
    return unvec(y, r, c);
}

Vector integrate_vector_ode_path(const MatrixCoeff& C, const std::vector<Complex>& zpath,
                                 Vector u0, const OdeOptions& opt, OdeStats* stats) {
    Vector u = std::move(u0);
    for (std::size_t seg = 0; seg + 1 < zpath.size(); ++seg) {
        const Complex za = zpath[seg], zb = zpath[seg + 1];
        if (za == zb) continue;
        auto rhs = [&](double t, const Vector& v, Vector& dv) {
            Complex z = za + t * (zb - za);
            dv = (zb - za) * (C(z) * v);
        };
        u = integrate_ode(rhs, 0.0, 1.0, u, opt, stats);
    }
    return u;
}

} // namespace isomono
