#include "isomono/infinity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace isomono {

namespace {
constexpr double TWO_PI = 2.0 * M_PI;

double wrap_2pi(double th) {
    double w = std::fmod(th, TWO_PI);
    if (w < 0) w += TWO_PI;
    return w;
}
} // namespace

std::vector<StokesRay> stokes_rays(const Lambda& lambda) {
    std::vector<StokesRay> rays;
    const int s = lambda.partition.s();
    for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) {
            if (i == j) continue;
            Complex d = lambda.values[static_cast<std::size_t>(i)] -
                        lambda.values[static_cast<std::size_t>(j)];
            // Re(d z) = 0 with Im(d z) < 0  =>  arg z = -pi/2 - arg d (mod 2 pi)
            double th = wrap_2pi(-M_PI / 2.0 - std::arg(d));
            rays.push_back({th, i, j});
        }
    }
    std::sort(rays.begin(), rays.end(), [](const StokesRay& a, const StokesRay& b) {
        if (a.theta != b.theta) return a.theta < b.theta;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    return rays;
}

namespace {

// distance from the direction family {tau + k pi} to a ray direction
double dist_mod_pi(double tau, double ray) {
    double d = std::fmod(std::abs(ray - tau), M_PI);
    return std::min(d, M_PI - d);
}

} // namespace

StokesGeometry choose_admissible_tau(const std::vector<std::vector<StokesRay>>& ray_sets,
                                     double preferred, double min_margin) {
    StokesGeometry geom;
    std::vector<double> dirs;
    for (const auto& set : ray_sets) {
        for (const auto& r : set) {
            geom.rays.push_back(r);
            dirs.push_back(std::fmod(wrap_2pi(r.theta), M_PI));   // mod pi suffices for the margin
        }
    }
    std::sort(geom.rays.begin(), geom.rays.end(),
              [](const StokesRay& a, const StokesRay& b) { return a.theta < b.theta; });

    if (dirs.empty()) {
        geom.tau = preferred;
        geom.margin = M_PI / 2.0;
        return geom;
    }
    std::sort(dirs.begin(), dirs.end());
    dirs.erase(std::unique(dirs.begin(), dirs.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-14; }),
               dirs.end());

    // best tau = midpoint of the widest gap between consecutive directions mod pi
    double best_tau = preferred, best_margin = -1.0;
    const std::size_t m = dirs.size();
    for (std::size_t i = 0; i < m; ++i) {
        double lo = dirs[i];
        double hi = (i + 1 < m) ? dirs[i + 1] : dirs[0] + M_PI;
        double mid = 0.5 * (lo + hi);
        double margin = 0.5 * (hi - lo);
        if (margin > best_margin + 1e-15) {
            best_margin = margin;
            best_tau = std::fmod(mid, M_PI);
        } else if (std::abs(margin - best_margin) <= 1e-15) {
            // deterministic tie-break toward `preferred`
            if (dist_mod_pi(preferred, std::fmod(mid, M_PI)) <
                dist_mod_pi(preferred, best_tau))
                best_tau = std::fmod(mid, M_PI);
        }
    }
    geom.tau = best_tau;
    geom.margin = best_margin;
    if (geom.margin < min_margin)
        throw std::runtime_error(
            "choose_admissible_tau: margin below tau_min_margin (shrink the lambda range)");
    return geom;
}

StokesGeometry stokes_geometry(const Lambda& lambda, double preferred, double min_margin) {
    return choose_admissible_tau({stokes_rays(lambda)}, preferred, min_margin);
}

std::pair<double, double> sector_bounds(const StokesGeometry& geom, int nu) {
    return {geom.tau + (nu - 1) * M_PI, geom.tau + nu * M_PI};
}

std::vector<double> rays_in_interval(const std::vector<StokesRay>& rays, double lo, double hi) {
    std::vector<double> out;
    for (const auto& r : rays) {
        double base = wrap_2pi(r.theta);
        long k0 = static_cast<long>(std::floor((lo - base) / TWO_PI));
        for (long k = k0; base + k * TWO_PI < hi + 1e-15; ++k) {
            double th = base + k * TWO_PI;
            if (th > lo + 1e-15 && th < hi - 1e-15) out.push_back(th);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](double a, double b) { return std::abs(a - b) < 1e-13; }),
              out.end());
    return out;
}

double sector_init_angle(const StokesGeometry& geom, int nu, std::optional<double> containing) {
    auto [lo, hi] = sector_bounds(geom, nu);
    std::vector<double> cuts = rays_in_interval(geom.rays, lo, hi);
    std::vector<double> edges;
    edges.push_back(lo);
    edges.insert(edges.end(), cuts.begin(), cuts.end());
    edges.push_back(hi);

    if (containing) {
        double target = *containing;
        if (target <= lo || target >= hi)
            throw std::invalid_argument("sector_init_angle: direction not inside the sector");
        for (std::size_t i = 0; i + 1 < edges.size(); ++i)
            if (target >= edges[i] && target <= edges[i + 1])
                return 0.5 * (edges[i] + edges[i + 1]);
    }
    double best = lo, width = -1.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double w = edges[i + 1] - edges[i];
        if (w > width) {
            width = w;
            best = 0.5 * (edges[i] + edges[i + 1]);
        }
    }
    return best;
}

// ---- formal series ------------------------------------------------------------

Matrix FormalInfinityData::D_matrix() const {
    Matrix M = Matrix::Zero(n(), n());
    for (int i = 0; i < n(); ++i) M(i, i) = double(D[static_cast<std::size_t>(i)]);
    return M;
}

Matrix FormalInfinityData::phi(Complex z) const {
    Matrix P = J;
    for (const auto& [l, Rl] : R_by_gap) P += Rl * std::pow(z, -l);
    return P;
}

FormalInfinityData formal_series(const CoalescedSystem& sys, const FormalOptions& opt) {
    const auto& part = sys.partition();
    const int n = sys.n(), s = part.s();
    const auto& jr = sys.jordanization();

    FormalInfinityData fd;
    fd.K = opt.K;
    fd.T = jr.T;
    fd.J = jr.J;

    // resonance admissibility: diagonalizable blocks only, when resonant
    auto rep = detect_resonances(jr, opt.int_tol);
    for (const auto& p : rep.partial) {
        const auto& sizes = jr.jordan_block_sizes[static_cast<std::size_t>(p.block)];
        if (std::any_of(sizes.begin(), sizes.end(), [](int m) { return m > 1; })) {
            std::ostringstream os;
            os << "formal_series: partial resonance in non-diagonalizable block " << p.block
               << " (eigenvalue pair " << p.i << "," << p.j << ", gap " << p.ell
               << ") is unsupported";
            throw std::runtime_error(os.str());
        }
    }

    Matrix cA = fd.T.partialPivLu().solve(sys.A * fd.T);   // T^-1 A T
    std::vector<Complex> mu(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) mu[static_cast<std::size_t>(i)] = fd.J(i, i);
    auto [d, rho] = levelt_exponents(mu);
    fd.D = d;
    fd.S = fd.J - fd.D_matrix();

    std::vector<Complex> lam_of(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lam_of[static_cast<std::size_t>(i)] =
            sys.lambda.values[static_cast<std::size_t>(part.block_of(i))];

    auto is_diag_block = [&](int b) {
        const auto& sizes = jr.jordan_block_sizes[static_cast<std::size_t>(b)];
        return std::all_of(sizes.begin(), sizes.end(), [](int m) { return m == 1; });
    };

    fd.F.assign(1, Matrix::Identity(n, n));
    Matrix W_prev = fd.J - cA;   // W_0; diagonal blocks vanish by construction

    for (int k = 1; k <= opt.K; ++k) {
        Matrix Fk = Matrix::Zero(n, n);
        // off-diagonal blocks from [Lambda, F_k] = W_{k-1}
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (part.block_of(i) != part.block_of(j))
                    Fk(i, j) = W_prev(i, j) /
                               (lam_of[static_cast<std::size_t>(i)] - lam_of[static_cast<std::size_t>(j)]);

        // diagonal blocks: -(ad_{J_b} + k) X + R_k = G_k per block b
        Matrix Rk = Matrix::Zero(n, n);
        bool has_res = false;
        Matrix AF = cA * Fk;
        for (int b = 0; b < s; ++b) {
            const int off = part.offset(b), p = part.size(b);
            Matrix Gk = AF.block(off, off, p, p) - fd.J.block(off, off, p, p) * Fk.block(off, off, p, p);
            for (const auto& [l, Rl] : fd.R_by_gap)
                if (l < k)
                    Gk -= fd.F[static_cast<std::size_t>(k - l)].block(off, off, p, p) *
                          Rl.block(off, off, p, p);

            if (is_diag_block(b)) {
                for (int a = 0; a < p; ++a) {
                    for (int c = 0; c < p; ++c) {
                        Complex den = mu[static_cast<std::size_t>(off + a)] -
                                      mu[static_cast<std::size_t>(off + c)] + Complex(double(k), 0.0);
                        if (std::abs(den) <= opt.int_tol) {
                            Rk(off + a, off + c) = Gk(a, c);
                            has_res = true;
                        } else {
                            Fk(off + a, off + c) = -Gk(a, c) / den;
                        }
                    }
                }
            } else {
                // non-resonant Jordan block: -(ad_J + k) X = G is the
                // Sylvester equation J X - X (J - k I) = -G; dense Kronecker
                // solve at this scale
                Matrix Jb = fd.J.block(off, off, p, p);
                Matrix M = Matrix::Zero(p * p, p * p);
                Matrix Jk = Jb - double(k) * Matrix::Identity(p, p);
                for (int c = 0; c < p; ++c) M.block(c * p, c * p, p, p) = Jb;
                for (int c = 0; c < p; ++c)
                    for (int c2 = 0; c2 < p; ++c2)
                        M.block(c * p, c2 * p, p, p) -= Jk(c2, c) * Matrix::Identity(p, p);
                Vector rhs(p * p);
                for (int c = 0; c < p; ++c) rhs.segment(c * p, p) = -Gk.col(c);
                Vector x = M.partialPivLu().solve(rhs);
                for (int c = 0; c < p; ++c) Fk.block(off, off + c, p, 1) = x.segment(c * p, p);
            }
        }
        if (has_res) fd.R_by_gap[k] = Rk;
        fd.F.push_back(Fk);

        Matrix W = -double(k) * Fk + Fk * fd.J - cA * Fk;
        for (const auto& [l, Rl] : fd.R_by_gap)
            if (l <= k) W += fd.F[static_cast<std::size_t>(k - l)] * Rl;
        W_prev = W;
    }

    fd.R = Matrix::Zero(n, n);
    for (const auto& [l, Rl] : fd.R_by_gap) fd.R += Rl;
    fd.L = fd.S + fd.R;
    return fd;
}

Matrix formal_eval_core(const FormalInfinityData& fd, const CoverPoint& zp) {
    const int n = fd.n();
    const Complex z = zp.z();
    Matrix S = Matrix::Identity(n, n);
    for (int k = 1; k < static_cast<int>(fd.F.size()); ++k)
        S += fd.F[static_cast<std::size_t>(k)] * std::pow(z, -k);
    return fd.T * S * matrix_power(fd.D_matrix(), zp) * matrix_power(fd.L, zp);
}

InfinityCertificate infinity_certify(const FormalInfinityData& fd, const CoalescedSystem& sys,
                                     double r_min, int points, double decade) {
    InfinityCertificate cert;
    const Matrix Lam = sys.lambda.matrix();
    const int n = fd.n();
    for (int i = 0; i < points; ++i) {
        double r = r_min * std::pow(decade, double(i) / double(points - 1));
        CoverPoint zp{r, 0.2};
        Complex z = zp.z();
        Matrix S = Matrix::Identity(n, n), Sp = Matrix::Zero(n, n);
        for (int k = 1; k < static_cast<int>(fd.F.size()); ++k) {
            Complex zk = std::pow(z, -k);
            S += fd.F[static_cast<std::size_t>(k)] * zk;
            Sp -= double(k) * fd.F[static_cast<std::size_t>(k)] * (zk / z);
        }
        // residual of the T-frame factor H = S z^D z^L against
        // H' = (Lambda + cA/z) H - H (Lambda + Phi/z): e^{Lambda z}-free
        Matrix cA = fd.T.partialPivLu().solve(sys.A * fd.T);
        Matrix tail = matrix_power(fd.D_matrix(), zp) * matrix_power(fd.L, zp);
        Matrix lhs = (Sp + S * (fd.phi(z) / z + Lam)) * tail;
        Matrix rhs = (Lam + cA / z) * S * tail;
        double res = max_abs(lhs - rhs) / std::max(1.0, max_abs(S * tail));
        cert.radii.push_back(r);
        cert.residuals.push_back(res);
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = points;
    for (int i = 0; i < m; ++i) {
        double x = std::log(1.0 / cert.radii[static_cast<std::size_t>(i)]);
        double y = std::log(std::max(cert.residuals[static_cast<std::size_t>(i)], 1e-300));
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    cert.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return cert;
}

// ---- sector solutions --------------------------------------------------------

double default_R_match(const CoalescedSystem& sys, const FormalInfinityData& fd, double eps_target) {
    // truncation error ~ |F_K| R^{-(K+1)}; also keep |lambda| R representable
    double sep = sys.lambda.min_separation();
    if (!std::isfinite(sep) || sep <= 0) sep = 1.0;
    double fK = std::max(1.0, max_abs(fd.F.back()));
    int K = fd.K;
    double R = std::pow(fK / eps_target, 1.0 / double(K + 1));
    double Rmin = 30.0 / sep;
    double lam_max = 0.0;
    for (const auto& l : sys.lambda.values) lam_max = std::max(lam_max, std::abs(l));
    double Rcap = lam_max > 0 ? 250.0 / lam_max : 1e4;
    return std::min(std::max(R, Rmin), std::max(Rcap, Rmin));
}

Matrix sector_eval(const CoalescedSystem& sys, const FormalInfinityData& fd, double theta_init,
                   const CoverPoint& target, const SectorOptions& opt, OdeStats* stats) {
    const auto& part = sys.partition();
    const int n = sys.n();
    double R = opt.R_match > 0 ? opt.R_match : default_R_match(sys, fd);
    if (R < target.r)
        R = 2.0 * target.r;

    std::vector<Complex> lam_of(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        lam_of[static_cast<std::size_t>(i)] =
            sys.lambda.values[static_cast<std::size_t>(part.block_of(i))];

    // init: exponential-free core H(z0) = T S z^D z^L; column c of Y e^{-lam_c z}
    CoverPoint z0{R, theta_init};
    Matrix H0 = formal_eval_core(fd, z0);

    // path: radial leg (R -> r_target) at theta_init, then angular arc at r_target
    std::vector<Complex> path;
    path.push_back(z0.z());
    path.push_back(std::polar(target.r, theta_init));
    const int nseg = std::max(2, opt.arc_segments);
    for (int k = 1; k <= nseg; ++k) {
        double th = theta_init + (target.theta - theta_init) * double(k) / double(nseg);
        path.push_back(std::polar(target.r, th));
    }

    OdeOptions oo;
    oo.rtol = opt.rtol;
    oo.atol = opt.atol;

    const Matrix Lam = sys.lambda.matrix();
    Matrix Y = Matrix::Zero(n, n);
    for (int c = 0; c < n; ++c) {
        const Complex shift = lam_of[static_cast<std::size_t>(c)];
        auto coeff = [&](Complex z) -> Matrix {
            Matrix M = sys.A / z;
            for (int i = 0; i < n; ++i) M(i, i) += lam_of[static_cast<std::size_t>(i)] - shift;
            return M;
        };
        Vector u0 = H0.col(c);
        Vector u = integrate_vector_ode_path(coeff, path, u0, oo, stats);
        Y.col(c) = u * std::exp(shift * target.z());
    }
    return Y;
}

SectorSolution sector_solution(const CoalescedSystem& sys, const StokesGeometry& geom,
                               const FormalInfinityData& fd, int nu,
                               const std::vector<CoverPoint>& grid, const SectorOptions& opt) {
    SectorSolution sol;
    sol.nu = nu;
    sol.R_match = opt.R_match > 0 ? opt.R_match : default_R_match(sys, fd);
    sol.theta_init = sector_init_angle(geom, nu);
    SectorOptions o2 = opt;
    o2.R_match = sol.R_match;
    double fK = std::max(1.0, max_abs(fd.F.back()));
    sol.eps_init_estimate = fK * std::pow(sol.R_match, -(fd.K + 1));
    for (const auto& zp : grid) {
        auto [lo, hi] = sector_bounds(geom, nu);
        if (zp.theta <= lo || zp.theta >= hi)
            throw std::invalid_argument("sector_solution: grid point outside the sector");
        sol.samples.push_back(sector_eval(sys, fd, sol.theta_init, zp, o2, &sol.stats));
        sol.grid.push_back(zp);
    }
    return sol;
}

} // namespace isomono
