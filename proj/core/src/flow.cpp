#include "isomono/flow.hpp"

#include <algorithm>
#include <cmath>

namespace isomono {

std::vector<Complex> DeformationPath::at(double t) const {
    const int m = segments();
    if (m < 1) throw std::invalid_argument("DeformationPath: need at least two waypoints");
    double u = t * m;
    int seg = std::min(m - 1, std::max(0, static_cast<int>(std::floor(u))));
    double tl = u - seg;
    const auto& a = waypoints[static_cast<std::size_t>(seg)];
    const auto& b = waypoints[static_cast<std::size_t>(seg) + 1];
    std::vector<Complex> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + tl * (b[i] - a[i]);
    return out;
}

std::vector<Complex> DeformationPath::velocity(int segment) const {
    const auto& a = waypoints[static_cast<std::size_t>(segment)];
    const auto& b = waypoints[static_cast<std::size_t>(segment) + 1];
    std::vector<Complex> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = b[i] - a[i];
    return v;
}

namespace {
// min over t in [0,1] of |alpha + t beta|
double min_abs_linear(Complex alpha, Complex beta) {
    double b2 = std::norm(beta);
    if (b2 == 0.0) return std::abs(alpha);
    double tstar = -(alpha.real() * beta.real() + alpha.imag() * beta.imag()) / b2;
    tstar = std::clamp(tstar, 0.0, 1.0);
    return std::abs(alpha + tstar * beta);
}
} // namespace

double DeformationPath::stratum_margin() const {
    double m = std::numeric_limits<double>::infinity();
    for (int seg = 0; seg < segments(); ++seg) {
        const auto& a = waypoints[static_cast<std::size_t>(seg)];
        const auto& b = waypoints[static_cast<std::size_t>(seg) + 1];
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = i + 1; j < a.size(); ++j)
                m = std::min(m, min_abs_linear(a[i] - a[j], (b[i] - b[j]) - (a[i] - a[j])));
    }
    return m;
}

bool DeformationPath::closed(double tol) const {
    const auto& a = waypoints.front();
    const auto& b = waypoints.back();
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d <= tol;
}

DeformationPath DeformationPath::line(std::vector<Complex> from, std::vector<Complex> to) {
    return DeformationPath{{std::move(from), std::move(to)}};
}

Matrix deformation_rhs(const Matrix& A, const Lambda& lambda, const std::vector<Complex>& dlambda,
                       const DSpec& dspec) {
    CoalescedSystem sys(lambda, A, dspec);
    auto omegas = build_omega(sys);
    auto dmats = dspec.eval(lambda.values, sys.s(), sys.n());
    Matrix W = Matrix::Zero(sys.n(), sys.n());
    for (int j = 0; j < sys.s(); ++j)
        W += (omegas[static_cast<std::size_t>(j)] + dmats[static_cast<std::size_t>(j)]) *
             dlambda[static_cast<std::size_t>(j)];
    return W * A - A * W;
}

namespace {

Vector vec(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }
Matrix unvec(const Vector& v, Eigen::Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

std::vector<Complex> sorted_eigs(const Matrix& M) {
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

// symmetric matching distance between equally sized spectra (greedy on sorted
// lists is enough at the drift scales monitored here)
double spectrum_distance(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

FlowResult integrate_flow(const Matrix& A0, const BlockPartition& part, const DeformationPath& path,
                          const DSpec& dspec, const FlowOptions& opt) {
    if (static_cast<int>(path.waypoints.front().size()) != part.s())
        throw std::invalid_argument("integrate_flow: path dimension does not match partition");
    if (path.stratum_margin() < opt.eig_sep_tol)
        throw std::runtime_error("integrate_flow: path leaves the stratum (eigenvalue collision)");

    const int n = part.n();
    FlowResult res;
    res.dspec = dspec;
    res.path = path;

    const auto eig0 = sorted_eigs(A0);
    const Matrix diag0 = block_diagonal_part(A0, part);

    OdeOptions oo;
    oo.rtol = opt.rtol;
    oo.atol = opt.atol;

    res.monitors.min_stratum_margin = path.stratum_margin();
    res.samples.push_back({0.0, path.at(0.0), A0});

    Vector y = vec(A0);
    const int m = path.segments();
    for (int seg = 0; seg < m; ++seg) {
        auto v = path.velocity(seg);
        auto observer = [&](double t, const Vector& yv) {
            double tg = (seg + t) / m;
            Matrix A = unvec(yv, n);
            double sd = spectrum_distance(eig0, sorted_eigs(A));
            res.monitors.spectrum_drift = std::max(res.monitors.spectrum_drift, sd);
            double dd = max_abs(block_diagonal_part(A, part) - diag0);
            res.monitors.diag_block_drift = std::max(res.monitors.diag_block_drift, dd);
            if (opt.record_samples &&
                static_cast<int>(res.samples.size()) < opt.max_recorded_samples)
                res.samples.push_back({tg, path.at(tg), A});
        };
        auto rhs = [&](double t, const Vector& yv, Vector& dy) {
            auto lam = path.at((seg + t) / m);
            Matrix A = unvec(yv, n);
            Lambda lambda(lam, part);
            dy = vec(deformation_rhs(A, lambda, v, dspec));
        };
        y = integrate_ode(rhs, 0.0, 1.0, y, oo, &res.stats, observer);
    }

    Matrix Afinal = unvec(y, n);
    if (res.samples.back().t < 1.0) res.samples.push_back({1.0, path.at(1.0), Afinal});
    res.samples.back().A = Afinal;

    if (path.closed(1e-14))
        res.monitors.closure_error = max_abs(Afinal - A0);

    double worst = std::max(res.monitors.spectrum_drift,
                            dspec.is_zero() ? res.monitors.diag_block_drift : 0.0);
    if (res.monitors.closure_error >= 0) worst = std::max(worst, res.monitors.closure_error);
    res.monitors.flagged = worst > opt.monitor_fail;
    return res;
}

GaugeResult gauge_transform(const Matrix& A, const std::vector<Matrix>& omegas,
                            const BlockPartition& part, const Matrix& T, const Matrix& Tcheck) {
    if (max_abs(block_offdiagonal_part(T, part)) > 1e-12 * std::max(1.0, max_abs(T)) ||
        max_abs(block_offdiagonal_part(Tcheck, part)) > 1e-12 * std::max(1.0, max_abs(Tcheck)))
        throw std::invalid_argument("gauge_transform: T and Tcheck must be block-diagonal");

    auto Tlu = T.partialPivLu();
    auto conj = [&](const Matrix& M) {
        Matrix inner = Tlu.solve(M * T);
        return Matrix(Tcheck * inner * Tcheck.partialPivLu().inverse());
    };
    GaugeResult out{conj(A), {}, 0.0};
    for (const auto& w : omegas) out.omegas.push_back(conj(w));
    out.diag_agreement =
        max_abs(block_diagonal_part(out.A, part) - block_diagonal_part(A, part));
    // both must Jordanize the diagonal blocks to the same J for the
    // diagonal parts to agree; surface a residual check instead of trusting
    if (out.diag_agreement > 1e-6 * std::max(1.0, max_abs(A)))
        throw std::invalid_argument(
            "gauge_transform: Tcheck does not Jordanize the same diagonal blocks (diagonal parts moved)");
    return out;
}

TFlowResult t_flow(const Matrix& A0, const Matrix& T0, const BlockPartition& part,
                   const DeformationPath& path, const DSpec& dspec, const FlowOptions& opt) {
    const int n = part.n();
    TFlowResult res;

    Matrix AD0 = block_diagonal_part(A0, part);
    Matrix Jref = T0.partialPivLu().solve(AD0 * T0);

    OdeOptions oo;
    oo.rtol = opt.rtol;
    oo.atol = opt.atol;

    // state: [vec(T); vec(A_D)], dT = D T, dA_D = [D, A_D]
    Vector y(2 * n * n);
    y.head(n * n) = vec(T0);
    y.tail(n * n) = vec(AD0);

    const int m = path.segments();
    for (int seg = 0; seg < m; ++seg) {
        auto v = path.velocity(seg);
        auto rhs = [&](double t, const Vector& yv, Vector& dy) {
            auto lam = path.at((seg + t) / m);
            Matrix T = unvec(yv.head(n * n), n);
            Matrix AD = unvec(yv.tail(n * n), n);
            auto dmats = dspec.eval(lam, part.s(), n);
            Matrix D = Matrix::Zero(n, n);
            for (int j = 0; j < part.s(); ++j) D += dmats[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
            dy.resize(2 * n * n);
            dy.head(n * n) = vec(Matrix(D * T));
            dy.tail(n * n) = vec(Matrix(D * AD - AD * D));
        };
        auto observer = [&](double t, const Vector& yv) {
            auto lam = path.at((seg + t) / m);
            Matrix T = unvec(yv.head(n * n), n);
            Matrix AD = unvec(yv.tail(n * n), n);
            res.jordan_drift = std::max(
                res.jordan_drift, max_abs(Matrix(T.partialPivLu().solve(AD * T) - Jref)));
            auto dmats = dspec.eval(lam, part.s(), n);
            for (int j = 0; j < part.s(); ++j) {
                Matrix TinvdT = T.partialPivLu().solve(dmats[static_cast<std::size_t>(j)] * T);
                res.commutator_residual = std::max(
                    res.commutator_residual, max_abs(Matrix(TinvdT * Jref - Jref * TinvdT)));
            }
            res.t.push_back((seg + t) / m);
            res.T.push_back(T);
        };
        y = integrate_ode(rhs, 0.0, 1.0, y, oo, &res.stats, observer);
    }
    res.final_T = unvec(y.head(n * n), n);
    return res;
}

} // namespace isomono
