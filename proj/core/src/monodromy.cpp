#include "isomono/monodromy.hpp"

#include <algorithm>
#include <cmath>

namespace isomono {

MonodromyAtZero monodromy_at_zero(const CoalescedSystem& sys, const LeveltData& lev, double r,
                                  double rtol) {
    MonodromyAtZero out;
    const int n = sys.n();
    CoverPoint start{r, 0.0};
    Matrix Y0 = levelt_eval(lev, start);

    const Matrix Lam = sys.lambda.matrix();
    auto coeff = [&](Complex z) -> Matrix { return Lam + sys.A / z; };

    // counterclockwise loop in arc segments
    const int nseg = 24;
    std::vector<Complex> path;
    for (int k = 0; k <= nseg; ++k)
        path.push_back(std::polar(r, 2.0 * M_PI * double(k) / double(nseg)));

    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = 1e-16;
    Matrix Yl = integrate_matrix_ode_path(coeff, path, Y0, oo, &out.stats);

    out.M0 = Y0.partialPivLu().solve(Yl);
    out.vs_exponent_residual = max_abs(Matrix(out.M0 - lev.monodromy_factor()));
    (void)n;
    return out;
}

namespace {

double stokes_unipotency_residual(const Matrix& S, const CoalescedSystem& sys, double overlap_angle,
                                  int sign) {
    // diag must be 1; entry (i, j) must vanish unless
    // Re((lambda_j - lambda_i) z) * sign < 0 on the overlap ray
    const auto& part = sys.partition();
    double res = 0.0;
    for (int i = 0; i < S.rows(); ++i)
        res = std::max(res, std::abs(S(i, i) - Complex(1.0, 0.0)));
    for (int i = 0; i < S.rows(); ++i) {
        for (int j = 0; j < S.cols(); ++j) {
            if (i == j) continue;
            int bi = part.block_of(i), bj = part.block_of(j);
            if (bi == bj) {
                res = std::max(res, std::abs(S(i, j)));
                continue;
            }
            Complex d = sys.lambda.values[static_cast<std::size_t>(bj)] -
                        sys.lambda.values[static_cast<std::size_t>(bi)];
            double c = (d * std::polar(1.0, overlap_angle)).real() * sign;
            if (c > 0) res = std::max(res, std::abs(S(i, j)));
        }
    }
    return res;
}

} // namespace

StokesPair stokes_matrices(const CoalescedSystem& sys, const StokesGeometry& geom,
                           const FormalInfinityData& fd, const StokesOptions& opt) {
    StokesPair out;
    double sep = sys.lambda.min_separation();
    if (!std::isfinite(sep) || sep <= 0) sep = 1.0;
    const double r_eval = opt.eval_scale / sep;

    SectorOptions so = opt.sector;
    if (so.R_match <= 0) so.R_match = default_R_match(sys, fd);
    so.R_match = std::max(so.R_match, 2.0 * r_eval);
    double fK = std::max(1.0, max_abs(fd.F.back()));
    out.eps_budget = fK * std::pow(so.R_match, -(fd.K + 1)) + 10.0 * so.rtol;

    auto extract = [&](int nu) -> std::pair<Matrix, double> {
        const double overlap = geom.tau + nu * M_PI;
        const double th_a = sector_init_angle(geom, nu, overlap);
        const double th_b = sector_init_angle(geom, nu + 1, overlap);
        Matrix Sref;
        double spread = 0.0;
        for (int q = 0; q < opt.eval_points; ++q) {
            double r = r_eval * (1.0 + 0.25 * q);
            CoverPoint zp{r, overlap};
            Matrix Ya = sector_eval(sys, fd, th_a, zp, so, &out.stats);
            Matrix Yb = sector_eval(sys, fd, th_b, zp, so, &out.stats);
            Matrix S = Ya.partialPivLu().solve(Yb);
            if (q == 0)
                Sref = S;
            else
                spread = std::max(spread, max_abs(Matrix(S - Sref)));
        }
        return {Sref, spread};
    };

    auto [S0, sp0] = extract(0);
    auto [S1, sp1] = extract(1);
    out.S0 = S0;
    out.S1 = S1;
    out.spread0 = sp0;
    out.spread1 = sp1;
    out.unipotency_residual =
        std::max(stokes_unipotency_residual(S0, sys, geom.tau, +1),
                 stokes_unipotency_residual(S1, sys, geom.tau + M_PI, +1));
    return out;
}

CentralConnection central_connection(const CoalescedSystem& sys, const LeveltData& lev,
                                     const StokesGeometry& geom, const FormalInfinityData& fd,
                                     const ConnectionOptions& opt) {
    CentralConnection out;
    double sep = sys.lambda.min_separation();
    if (!std::isfinite(sep) || sep <= 0) sep = 1.0;

    // annulus radius: between the Levelt-series comfort zone and the
    // sector-solution inner reach
    double r_ann = opt.annulus_radius > 0 ? opt.annulus_radius : std::min(1.5, 2.0 / sep);
    out.annulus_radius = r_ann;

    SectorOptions so = opt.sector;
    if (so.R_match <= 0) so.R_match = default_R_match(sys, fd);

    const Matrix Lam = sys.lambda.matrix();
    auto coeff = [&](Complex z) -> Matrix { return Lam + sys.A / z; };

    // shared branch: angles inside S_0 on the (tau - pi, tau] part
    double th_init0 = sector_init_angle(geom, 0);
    const double r_series = std::min(0.3, 0.3 / std::max(1.0, max_abs(sys.A)));

    OdeOptions oo;
    oo.rtol = opt.rtol;
    oo.atol = 1e-16;

    Matrix C0ref;
    double spread = 0.0;
    for (int q = 0; q < opt.samples; ++q) {
        double th = geom.tau - 0.2 - 0.45 * M_PI * double(q) / std::max(1, opt.samples - 1);
        CoverPoint zp{r_ann, th};
        // Levelt solution: series value deep inside, propagated outward
        CoverPoint zs{r_series, th};
        Matrix Yl = levelt_eval(lev, zs);
        Yl = integrate_matrix_ode_path(coeff, {zs.z(), zp.z()}, Yl, oo, &out.stats);
        // sector-0 solution at the same point
        Matrix Y0 = sector_eval(sys, fd, th_init0, zp, so, &out.stats);
        Matrix C = Yl.partialPivLu().solve(Y0);
        if (q == 0)
            C0ref = C;
        else
            spread = std::max(spread, max_abs(Matrix(C - C0ref)));
    }
    out.C0 = C0ref;
    out.spread = spread;
    return out;
}

MonodromyData extract_monodromy(const CoalescedSystem& sys, const StokesGeometry& geom,
                                const LeveltOptions& lopt, const FormalOptions& fopt,
                                const StokesOptions& sopt, const ConnectionOptions& copt) {
    MonodromyData md;
    LeveltData lev = levelt_series(sys, lopt);
    md.D0 = lev.D;
    md.L0 = lev.L0;

    FormalInfinityData fd = formal_series(sys, fopt);
    md.D = fd.D;
    md.L = fd.L;

    StokesPair sp = stokes_matrices(sys, geom, fd, sopt);
    md.S0 = sp.S0;
    md.S1 = sp.S1;

    CentralConnection cc = central_connection(sys, lev, geom, fd, copt);
    md.C0 = cc.C0;

    MonodromyAtZero m0 = monodromy_at_zero(sys, lev);
    md.M0 = m0.M0;

    md.eps_budget = sp.eps_budget + cc.spread + sp.spread0 + sp.spread1;
    return md;
}

namespace {

std::vector<Complex> sorted_spectrum_of(const Matrix& M) {
    Eigen::ComplexEigenSolver<Matrix> es(M, false);
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return ev;
}

double spectrum_deviation(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

Vector vec(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }
Matrix unvec(const Vector& v, Eigen::Index n) { return Eigen::Map<const Matrix>(v.data(), n, n); }

// Jordanizer of A with column scaling matched to the co-propagated frame Gt:
// diagonalize, order columns by best match against Gt, rescale each column c
// by (Ghat^-1 Gt)_cc. Exact for a strong flow, and still a genuine
// Jordanizer when the co-propagated frame has drifted off one.
Matrix matched_jordanizer(const Matrix& A, const Matrix& Gt) {
    Eigen::ComplexEigenSolver<Matrix> es(A, true);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("audit: eigenvalue solver failed");
    Matrix Ghat = es.eigenvectors();
    Matrix X = Ghat.partialPivLu().solve(Gt);
    const int n = static_cast<int>(A.rows());
    // column permutation by dominant entry of X
    std::vector<int> pick(static_cast<std::size_t>(n), -1);
    std::vector<bool> used(static_cast<std::size_t>(n), false);
    for (int c = 0; c < n; ++c) {
        int best = -1;
        double bv = -1.0;
        for (int r2 = 0; r2 < n; ++r2) {
            if (used[static_cast<std::size_t>(r2)]) continue;
            if (std::abs(X(r2, c)) > bv) {
                bv = std::abs(X(r2, c));
                best = r2;
            }
        }
        pick[static_cast<std::size_t>(c)] = best;
        used[static_cast<std::size_t>(best)] = true;
    }
    Matrix G(n, n);
    for (int c = 0; c < n; ++c)
        G.col(c) = Ghat.col(pick[static_cast<std::size_t>(c)]) * X(pick[static_cast<std::size_t>(c)], c);
    return G;
}

} // namespace

IsomonodromyAudit verify_strong_isomonodromy(const FlowResult& flow, const BlockPartition& part,
                                             const AuditOptions& opt) {
    IsomonodromyAudit audit;
    const int n = part.n();
    const int m = flow.path.segments();

    // base-point data and frames
    const Matrix A0 = flow.samples.front().A;
    Lambda lam0(flow.samples.front().lambda, part);
    auto jr0 = jordanize_diag_blocks(A0, part);
    JordanizationResult jfull0 = jordanize(A0);

    // co-integrate A, G (Levelt frame), T (reducer) along the path, stopping
    // at the sample times
    std::vector<double> stop_times;
    for (int i = 0; i < opt.sample_count; ++i)
        stop_times.push_back(double(i) / double(std::max(1, opt.sample_count - 1)));

    OdeOptions oo;
    oo.rtol = opt.rtol;
    oo.atol = 1e-16;

    struct SampleState {
        std::vector<Complex> lambda;
        Matrix A, G, T;
    };
    std::vector<SampleState> states;

    // A(t) of the recorded trajectory, linearly interpolated between the
    // (dense) accepted-step samples. The frames G and T are carried against
    // this trajectory, whether or not it obeys the deformation equation.
    auto recorded_A_at = [&](double tg) -> Matrix {
        const auto& S = flow.samples;
        if (tg <= S.front().t) return S.front().A;
        if (tg >= S.back().t) return S.back().A;
        std::size_t hi = 1;
        while (hi + 1 < S.size() && S[hi].t < tg) ++hi;
        double t0 = S[hi - 1].t, t1 = S[hi].t;
        double w = (t1 > t0) ? (tg - t0) / (t1 - t0) : 0.0;
        return S[hi - 1].A * (1.0 - w) + S[hi].A * w;
    };

    Vector y(2 * n * n);
    y.head(n * n) = vec(jfull0.T);
    y.tail(n * n) = vec(jr0.T);

    states.push_back({flow.samples.front().lambda, A0, jfull0.T, jr0.T});

    auto rhs_global = [&](double tg, const Vector& yv, Vector& dy) {
        int seg = std::min(m - 1, std::max(0, static_cast<int>(std::floor(tg * m))));
        auto v = flow.path.velocity(seg);
        for (auto& c : v) c *= double(m);   // global-time velocity
        auto lamv = flow.path.at(tg);
        Lambda lambda(lamv, part);
        Matrix A = recorded_A_at(tg);
        Matrix G = unvec(yv.head(n * n), n);
        Matrix T = unvec(yv.tail(n * n), n);
        CoalescedSystem sys(lambda, A, flow.dspec);
        auto omegas = build_omega(sys);
        auto dmats = flow.dspec.eval(lamv, part.s(), n);
        Matrix W = Matrix::Zero(n, n), D = Matrix::Zero(n, n);
        for (int j = 0; j < part.s(); ++j) {
            W += (omegas[static_cast<std::size_t>(j)] + dmats[static_cast<std::size_t>(j)]) *
                 v[static_cast<std::size_t>(j)];
            D += dmats[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
        }
        dy.resize(2 * n * n);
        dy.head(n * n) = vec(Matrix(W * G));
        dy.tail(n * n) = vec(Matrix(D * T));
    };

    for (std::size_t i = 1; i < stop_times.size(); ++i) {
        y = integrate_ode(rhs_global, stop_times[i - 1], stop_times[i], y, oo);
        states.push_back({flow.path.at(stop_times[i]), recorded_A_at(stop_times[i]),
                          unvec(y.head(n * n), n), unvec(y.tail(n * n), n)});
    }

    // one admissible tau across all samples
    std::vector<std::vector<StokesRay>> ray_sets;
    for (const auto& st : states) ray_sets.push_back(stokes_rays(Lambda(st.lambda, part)));
    StokesGeometry geom = choose_admissible_tau(ray_sets);

    LeveltOptions lopt;
    lopt.K = opt.levelt_K;
    lopt.int_tol = opt.int_tol;
    FormalOptions fopt;
    fopt.K = opt.formal_K;
    fopt.int_tol = opt.int_tol;
    StokesOptions sopt;
    sopt.sector.rtol = opt.rtol;
    ConnectionOptions copt;
    copt.rtol = opt.rtol;
    copt.sector.rtol = opt.rtol;

    std::vector<MonodromyData> data;
    std::vector<bool> ok;
    double eps = 0.0;
    for (const auto& st : states) {
        audit.lambda_samples.push_back(st.lambda);
        try {
            Lambda lambda(st.lambda, part);
            CoalescedSystem sys(lambda, st.A, flow.dspec);
            // reducer from the carried T; Levelt frame from the carried G
            sys.reducer = jordanization_from_given(st.A, part, st.T, jr0.J, 1e-6);
            LeveltOptions li = lopt;
            li.prescribed_GJ = {{matched_jordanizer(st.A, st.G), jfull0.J}};
            MonodromyData md = extract_monodromy(sys, geom, li, fopt, sopt, copt);
            eps = std::max(eps, md.eps_budget);
            data.push_back(md);
            ok.push_back(true);
        } catch (const std::exception&) {
            data.push_back({});
            ok.push_back(false);
        }
    }
    audit.eps_budget = eps;

    const double tol = std::max(opt.tolerance, 3.0 * eps);
    auto add_item = [&](const std::string& name, auto deviation_fn) {
        AuditItem item{name, 0.0, tol, true, false};
        if (!ok.front()) {
            item.failed_to_extract = true;
            item.pass = false;
        } else {
            for (std::size_t i = 1; i < data.size(); ++i) {
                if (!ok[i]) {
                    item.failed_to_extract = true;
                    item.pass = false;
                    continue;
                }
                item.deviation = std::max(item.deviation, deviation_fn(data.front(), data[i]));
            }
            if (item.deviation > tol) item.pass = false;
        }
        audit.items.push_back(item);
    };

    add_item("D0", [](const MonodromyData& a, const MonodromyData& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.D0.size(); ++i)
            d = std::max(d, double(std::labs(a.D0[i] - b.D0[i])));
        return d;
    });
    add_item("L0", [](const MonodromyData& a, const MonodromyData& b) {
        return max_abs(Matrix(a.L0 - b.L0));
    });
    add_item("D", [](const MonodromyData& a, const MonodromyData& b) {
        double d = 0.0;
        for (std::size_t i = 0; i < a.D.size(); ++i)
            d = std::max(d, double(std::labs(a.D[i] - b.D[i])));
        return d;
    });
    add_item("L", [](const MonodromyData& a, const MonodromyData& b) {
        return max_abs(Matrix(a.L - b.L));
    });
    add_item("S0", [](const MonodromyData& a, const MonodromyData& b) {
        return max_abs(Matrix(a.S0 - b.S0));
    });
    add_item("S1", [](const MonodromyData& a, const MonodromyData& b) {
        return max_abs(Matrix(a.S1 - b.S1));
    });
    add_item("C0", [](const MonodromyData& a, const MonodromyData& b) {
        return max_abs(Matrix(a.C0 - b.C0));
    });
    add_item("M0_spectrum", [](const MonodromyData& a, const MonodromyData& b) {
        return spectrum_deviation(sorted_spectrum_of(a.M0), sorted_spectrum_of(b.M0));
    });

    audit.pass = std::all_of(audit.items.begin(), audit.items.end(),
                             [](const AuditItem& it) { return it.pass; });
    return audit;
}

} // namespace isomono
