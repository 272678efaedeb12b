#include "isomono/pfaffian.hpp"
#include "isomono/levelt.hpp"

namespace isomono {

DSpec DSpec::explicit_matrices(std::vector<Matrix> D) {
    DSpec d;
    d.kind = Kind::Explicit;
    d.explicit_D = std::move(D);
    return d;
}

DSpec DSpec::t_derived(std::function<Matrix(const std::vector<Complex>&)> T, double h) {
    DSpec d;
    d.kind = Kind::TDerived;
    d.T_eval = std::move(T);
    d.fd_step = h;
    return d;
}

DSpec DSpec::from_callback(std::function<std::vector<Matrix>(const std::vector<Complex>&)> f) {
    DSpec d;
    d.kind = Kind::Callback;
    d.callback = std::move(f);
    return d;
}

std::vector<Matrix> DSpec::eval(const std::vector<Complex>& lambda, int s, int n) const {
    switch (kind) {
    case Kind::Zero:
        return std::vector<Matrix>(static_cast<std::size_t>(s), Matrix::Zero(n, n));
    case Kind::Explicit:
        if (static_cast<int>(explicit_D.size()) != s)
            throw std::invalid_argument("DSpec: need one explicit D_j per deformation direction");
        return explicit_D;
    case Kind::Callback:
        return callback(lambda);
    case Kind::TDerived: {
        Matrix T = T_eval(lambda);
        Matrix Tinv = T.partialPivLu().inverse();
        std::vector<Matrix> out;
        out.reserve(static_cast<std::size_t>(s));
        for (int j = 0; j < s; ++j) {
            auto lp = lambda, lm = lambda;
            lp[static_cast<std::size_t>(j)] += fd_step;
            lm[static_cast<std::size_t>(j)] -= fd_step;
            Matrix dT = (T_eval(lp) - T_eval(lm)) / (2.0 * fd_step);
            out.push_back(dT * Tinv);
        }
        return out;
    }
    }
    throw std::logic_error("DSpec: unreachable");
}

const JordanizationResult& CoalescedSystem::jordanization() const {
    if (reducer) return *reducer;
    if (!cached_) cached_ = jordanize_diag_blocks(A, partition());
    return *cached_;
}

std::vector<Matrix> build_omega(const CoalescedSystem& sys) {
    const auto& part = sys.partition();
    sys.lambda.check_stratum(sys.eig_sep_tol);
    const int s = part.s(), n = part.n();
    std::vector<Matrix> omegas(static_cast<std::size_t>(s), Matrix::Zero(n, n));
    for (int j = 0; j < s; ++j) {
        Matrix& w = omegas[static_cast<std::size_t>(j)];
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < s; ++b) {
                if (a == b) continue;
                double dja = (a == j) ? 1.0 : 0.0;
                double djb = (b == j) ? 1.0 : 0.0;
                if (dja == djb) continue;
                Complex denom = sys.lambda.values[static_cast<std::size_t>(a)] -
                                sys.lambda.values[static_cast<std::size_t>(b)];
                set_block(w, part, a, b, get_block(sys.A, part, a, b) * ((dja - djb) / denom));
            }
        }
    }
    return omegas;
}

PfaffianForm build_pfaffian(const CoalescedSystem& sys) {
    PfaffianForm form{sys, build_omega(sys), {}, {}, {}};
    form.dmats = sys.dspec.eval(sys.lambda.values, sys.s(), sys.n());
    for (int j = 0; j < sys.s(); ++j) {
        form.omega_tildes.push_back(form.omegas[static_cast<std::size_t>(j)] +
                                    form.dmats[static_cast<std::size_t>(j)]);
        form.e_projectors.push_back(sys.lambda.projector(j));
    }
    return form;
}

Matrix assemble_oneform(const PfaffianForm& form, Complex z, int direction) {
    const int s = form.system.s();
    if (direction < 0 || direction > s)
        throw std::out_of_range("assemble_oneform: direction out of range");
    if (direction == 0) {
        if (z == Complex(0.0, 0.0))
            throw std::invalid_argument("assemble_oneform: dz coefficient has a pole at z = 0");
        return form.system.lambda.matrix() + form.system.A / z;
    }
    int j = direction - 1;
    return z * form.e_projectors[static_cast<std::size_t>(j)] +
           form.omega_tildes[static_cast<std::size_t>(j)];
}

LinearConstraintReport check_linear_constraints(const PfaffianForm& form, double tol) {
    LinearConstraintReport rep;
    rep.tolerance = tol;
    const Matrix Lam = form.system.lambda.matrix();
    const Matrix& A = form.system.A;
    const int s = form.system.s();

    for (int j = 0; j < s; ++j) {
        const Matrix& ot = form.omega_tildes[static_cast<std::size_t>(j)];
        const Matrix& E = form.e_projectors[static_cast<std::size_t>(j)];
        Matrix r = (Lam * ot - ot * Lam) - (E * A - A * E);
        rep.lambda_commutator_residual = std::max(rep.lambda_commutator_residual, max_abs(r));
    }
    for (int j = 0; j < s; ++j) {
        for (int k = j + 1; k < s; ++k) {
            const Matrix& oj = form.omega_tildes[static_cast<std::size_t>(j)];
            const Matrix& ok = form.omega_tildes[static_cast<std::size_t>(k)];
            const Matrix& Ej = form.e_projectors[static_cast<std::size_t>(j)];
            const Matrix& Ek = form.e_projectors[static_cast<std::size_t>(k)];
            Matrix r = (Ej * ok - ok * Ej) - (Ek * oj - oj * Ek);
            rep.cross_commutator_residual = std::max(rep.cross_commutator_residual, max_abs(r));
        }
    }
    rep.scale = std::max(1.0, max_abs(A));
    rep.pass = rep.relative() <= tol;
    return rep;
}

CurlReport curl_residual(const PfaffianFlow& flow, const std::vector<Complex>& lambda0, double h) {
    CurlReport rep;
    rep.step = h;

    auto eval_at = [&](double step) {
        PfaffianForm base = flow(lambda0);
        const int s = base.system.s();
        // central differences of ot_j and D_j in each lambda_i
        std::vector<std::vector<Matrix>> d_ot(static_cast<std::size_t>(s)),
            d_D(static_cast<std::size_t>(s));
        for (int i = 0; i < s; ++i) {
            auto lp = lambda0, lm = lambda0;
            lp[static_cast<std::size_t>(i)] += step;
            lm[static_cast<std::size_t>(i)] -= step;
            PfaffianForm fp = flow(lp), fm = flow(lm);
            for (int j = 0; j < s; ++j) {
                d_ot[static_cast<std::size_t>(i)].push_back(
                    (fp.omega_tildes[static_cast<std::size_t>(j)] -
                     fm.omega_tildes[static_cast<std::size_t>(j)]) /
                    (2.0 * step));
                d_D[static_cast<std::size_t>(i)].push_back(
                    (fp.dmats[static_cast<std::size_t>(j)] -
                     fm.dmats[static_cast<std::size_t>(j)]) /
                    (2.0 * step));
            }
        }
        double worst = 0.0, worstD = 0.0;
        for (int i = 0; i < s; ++i) {
            for (int j = i + 1; j < s; ++j) {
                const Matrix& oi = base.omega_tildes[static_cast<std::size_t>(i)];
                const Matrix& oj = base.omega_tildes[static_cast<std::size_t>(j)];
                Matrix r = d_ot[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                           d_ot[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -
                           (oi * oj - oj * oi);
                worst = std::max(worst, max_abs(r));
                const Matrix& Di = base.dmats[static_cast<std::size_t>(i)];
                const Matrix& Dj = base.dmats[static_cast<std::size_t>(j)];
                Matrix rd = d_D[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] -
                            d_D[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] -
                            (Di * Dj - Dj * Di);
                worstD = std::max(worstD, max_abs(rd));
            }
        }
        return std::pair<double, double>(worst, worstD);
    };

    auto [r1, d1] = eval_at(h);
    auto [r2, d2] = eval_at(h / 2);
    rep.max_residual_h = r1;
    rep.max_residual_h2 = r2;
    rep.d_curl_residual_h = d1;
    rep.d_curl_residual_h2 = d2;
    rep.richardson_ratio = r2 > 0 ? r1 / r2 : 0.0;
    return rep;
}

Matrix PoleShiftedForm::dz_coefficient(Complex z) const {
    if (z == pole) throw std::invalid_argument("pole-shifted form: z equals the pole");
    return base.system.lambda.matrix() + base.system.A / (z - pole);
}

Matrix PoleShiftedForm::dlambda_coefficient(Complex z, int j) const {
    if (j < 1 || j > base.system.s())
        throw std::out_of_range("pole-shifted form: direction out of range");
    return (z - pole) * base.e_projectors[static_cast<std::size_t>(j - 1)] +
           base.omega_tildes[static_cast<std::size_t>(j - 1)];
}

Matrix PoleShiftedForm::da_coefficient(Complex z) const {
    if (z == pole) throw std::invalid_argument("pole-shifted form: z equals the pole");
    return -base.system.lambda.matrix() - base.system.A / (z - pole);
}

PoleShiftedForm build_pole_shifted(const CoalescedSystem& sys, Complex a, int K) {
    PoleShiftedForm out{build_pfaffian(sys), a, Matrix()};
    // phi from the Levelt data at the shifted origin w = z - a, i.e. of the
    // unshifted system itself
    LeveltData lev = levelt_series(sys, K);
    const Matrix& F1 = lev.F.size() > 1 ? lev.F[1] : Matrix::Zero(sys.n(), sys.n());
    Matrix R1 = Matrix::Zero(sys.n(), sys.n());
    if (auto it = lev.R_by_gap.find(1); it != lev.R_by_gap.end()) R1 = it->second;
    Matrix core = F1 + (F1 * lev.J0 - lev.J0 * F1) + R1;
    out.phi = lev.G0 * core * lev.G0.partialPivLu().inverse();
    return out;
}

} // namespace isomono
