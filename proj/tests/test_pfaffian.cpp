#include <doctest.h>

#include "isomono/levelt.hpp"
#include "isomono/pfaffian.hpp"
#include "isomono/showcase.hpp"
#include "test_util.hpp"

using namespace isomono;

namespace {

CoalescedSystem random_system(int seed, std::vector<int> sizes, std::vector<Complex> lam,
                              DSpec d = DSpec::zero()) {
    BlockPartition part(sizes);
    Matrix A = testutil::random_matrix(part.n(), static_cast<unsigned>(seed));
    return CoalescedSystem(Lambda(std::move(lam), part), A, std::move(d));
}

} // namespace

TEST_CASE("build_omega: s=2 3x3 structure and omega_2 = -omega_1") {
    ThreeDExample ex;
    Complex x(1.3, 0.0);
    CoalescedSystem sys = example3d_system(ex, x);
    auto omegas = build_omega(sys);
    REQUIRE(omegas.size() == 2);
    Matrix A = sys.A;
    Matrix w1 = example3d_omega1(A, x);
    CHECK(testutil::rel_err(omegas[0], w1) < 1e-14);
    CHECK(testutil::rel_err(omegas[1], -w1) < 1e-14);
}

TEST_CASE("build_omega: s=1 has no deformation blocks") {
    CoalescedSystem sys = random_system(5, {3}, {Complex(0, 0)});
    auto omegas = build_omega(sys);
    REQUIRE(omegas.size() == 1);
    CHECK(max_abs(omegas[0]) == 0.0);
}

TEST_CASE("build_omega invariants on a random 4x4, partition (2,1,1)") {
    CoalescedSystem sys =
        random_system(17, {2, 1, 1}, {Complex(0, 0), Complex(1, 0), Complex(0.3, 0.8)});
    auto omegas = build_omega(sys);

    // diagonal blocks exactly zero (structural)
    for (const auto& w : omegas)
        CHECK(max_abs(block_diagonal_part(w, sys.partition())) == 0.0);

    // sum omega_j = 0
    Matrix sum = Matrix::Zero(4, 4);
    for (const auto& w : omegas) sum += w;
    CHECK(max_abs(sum) < 1e-14);

    // [Lambda, omega_j] = [E_j, A]
    Matrix Lam = sys.lambda.matrix();
    for (int j = 0; j < sys.s(); ++j) {
        Matrix E = sys.lambda.projector(j);
        Matrix r = (Lam * omegas[static_cast<std::size_t>(j)] -
                    omegas[static_cast<std::size_t>(j)] * Lam) -
                   (E * sys.A - sys.A * E);
        CHECK(max_abs(r) < 1e-14);
    }

    // block-diagonal part of [omega_i, omega_j] vanishes
    for (int i = 0; i < sys.s(); ++i)
        for (int j = 0; j < sys.s(); ++j) {
            Matrix c = omegas[static_cast<std::size_t>(i)] * omegas[static_cast<std::size_t>(j)] -
                       omegas[static_cast<std::size_t>(j)] * omegas[static_cast<std::size_t>(i)];
            CHECK(max_abs(block_diagonal_part(c, sys.partition())) < 1e-13);
        }
}

TEST_CASE("build_omega rejects collapsed strata") {
    BlockPartition part({1, 1});
    Matrix A = testutil::random_matrix(2, 3);
    CoalescedSystem sys(Lambda({Complex(0, 0), Complex(1e-13, 0)}, part), A);
    CHECK_THROWS(build_omega(sys));
}

TEST_CASE("assemble_oneform") {
    CoalescedSystem sys =
        random_system(23, {1, 2}, {Complex(0.4, 0), Complex(-1, 0.5)});
    PfaffianForm form = build_pfaffian(sys);

    SUBCASE("dz coefficient at z=1 is Lambda + A") {
        Matrix got = assemble_oneform(form, Complex(1, 0), 0);
        CHECK(testutil::rel_err(got, Matrix(sys.lambda.matrix() + sys.A)) < 1e-15);
    }
    SUBCASE("dlambda_j coefficient at z=0 is omega-tilde_j") {
        Matrix got = assemble_oneform(form, Complex(0, 0), 1);
        CHECK(testutil::rel_err(got, form.omega_tildes[0]) < 1e-15);
    }
    SUBCASE("dlambda_j at z=2 with D=0 matches hand assembly") {
        Matrix want = 2.0 * sys.lambda.projector(1) + form.omegas[1];
        CHECK(testutil::rel_err(assemble_oneform(form, Complex(2, 0), 2), want) < 1e-15);
    }
    SUBCASE("pole error at z=0 for the dz coefficient") {
        CHECK_THROWS_AS(assemble_oneform(form, Complex(0, 0), 0), std::invalid_argument);
    }
}

TEST_CASE("check_linear_constraints") {
    SUBCASE("holds by construction, including with a block-diagonal D") {
        BlockPartition part({2, 1, 1});
        Matrix D1 = Matrix::Zero(4, 4), D2 = Matrix::Zero(4, 4), D3 = Matrix::Zero(4, 4);
        D1.block(0, 0, 2, 2) = testutil::random_matrix(2, 31);
        D2(2, 2) = Complex(0.3, -0.1);
        D3(3, 3) = Complex(-1.0, 0.0);
        CoalescedSystem sys =
            random_system(29, {2, 1, 1}, {Complex(0, 0), Complex(1, 0), Complex(2.5, 0.5)},
                          DSpec::explicit_matrices({D1, D2, D3}));
        auto rep = check_linear_constraints(build_pfaffian(sys));
        CHECK(rep.pass);
        CHECK(rep.relative() < 1e-13);
    }
    SUBCASE("block-diagonal A gives exactly zero residuals") {
        BlockPartition part({2, 2});
        Matrix A = Matrix::Zero(4, 4);
        A.block(0, 0, 2, 2) = testutil::random_matrix(2, 37);
        A.block(2, 2, 2, 2) = testutil::random_matrix(2, 41);
        CoalescedSystem sys(Lambda({Complex(0, 0), Complex(1, 0)}, part), A);
        auto rep = check_linear_constraints(build_pfaffian(sys));
        CHECK(rep.lambda_commutator_residual == 0.0);
        CHECK(rep.cross_commutator_residual == 0.0);
    }
    SUBCASE("corrupted omega is caught (negative control)") {
        ThreeDExample ex;
        CoalescedSystem sys = example3d_system(ex, Complex(1.0, 0));
        PfaffianForm form = build_pfaffian(sys);
        form.omega_tildes[0](0, 1) = 0.0;   // zero one off-block entry
        auto rep = check_linear_constraints(form);
        CHECK_FALSE(rep.pass);
        CHECK(rep.lambda_commutator_residual > 1e-3);
    }
}

TEST_CASE("curl_residual") {
    ThreeDExample ex;
    BlockPartition part({1, 2});

    SUBCASE("constant block-diagonal A, D=0: residual zero") {
        Matrix A = Matrix::Zero(3, 3);
        A.block(1, 1, 2, 2) = testutil::random_matrix(2, 43);
        auto flow = [&](const std::vector<Complex>& lam) {
            return build_pfaffian(CoalescedSystem(Lambda(lam, part), A));
        };
        auto rep = curl_residual(flow, {Complex(1, 0), Complex(0, 0)}, 1e-5);
        CHECK(rep.max_residual_h < 1e-13);
    }

    SUBCASE("3D closed-form flow: O(h^2) convergence") {
        auto flow = [&](const std::vector<Complex>& lam) {
            Complex x = lam[0] - lam[1];
            return build_pfaffian(CoalescedSystem(Lambda(lam, part), example3d_closed_form(ex, x)));
        };
        auto rep = curl_residual(flow, {Complex(1, 0), Complex(0, 0)}, 1e-4);
        CHECK(rep.max_residual_h < 1e-6);
        CHECK(rep.richardson_ratio > 3.5);
        CHECK(rep.richardson_ratio < 4.5);
    }

    SUBCASE("D_j = d_jT T^-1 from the 3D reducer: D-curl vanishes") {
        auto dspec = DSpec::t_derived([&](const std::vector<Complex>& lam) {
            return example3d_T(ex, lam[0] - lam[1]);
        });
        auto flow = [&](const std::vector<Complex>& lam) {
            Complex x = lam[0] - lam[1];
            return build_pfaffian(
                CoalescedSystem(Lambda(lam, part), example3d_closed_form(ex, x), dspec));
        };
        auto r1 = curl_residual(flow, {Complex(1, 0), Complex(0, 0)}, 1e-3);
        auto r2 = curl_residual(flow, {Complex(1, 0), Complex(0, 0)}, 5e-4);
        CHECK(r2.d_curl_residual_h < 1e-5);
        CHECK(r2.d_curl_residual_h < r1.d_curl_residual_h);
    }
}

TEST_CASE("pole-shifted form") {
    // non-resonant diagonalizable A
    BlockPartition part({1, 2});
    Matrix A = testutil::random_matrix(3, 47, 0.4);
    CoalescedSystem sys(Lambda({Complex(0, 0), Complex(1.2, 0.3)}, part), A);

    SUBCASE("a = 0 reduces to the plain one-form plus phi") {
        auto ps = build_pole_shifted(sys, Complex(0, 0));
        PfaffianForm form = build_pfaffian(sys);
        Complex z(0.7, 0.4);
        CHECK(testutil::rel_err(ps.dz_coefficient(z), assemble_oneform(form, z, 0)) < 1e-14);
        CHECK(testutil::rel_err(ps.dlambda_coefficient(z, 1), assemble_oneform(form, z, 1)) < 1e-14);
    }

    SUBCASE("phi is independent of the G0 normalization freedom") {
        auto ps = build_pole_shifted(sys, Complex(0.5, 0));
        // recompute with rescaled eigenvector columns: G0 -> G0 K, [K, J0] = 0
        LeveltData lev = levelt_series(sys, 12);
        Matrix K = Matrix::Zero(3, 3);
        K(0, 0) = Complex(2.0, 1.0);
        K(1, 1) = Complex(0.3, 0.0);
        K(2, 2) = Complex(0.0, -1.5);
        LeveltOptions opt;
        opt.K = 12;
        opt.prescribed_GJ = {{Matrix(lev.G0 * K), lev.J0}};
        LeveltData lev2 = levelt_series(sys, opt);
        const Matrix& F1 = lev2.F[1];
        Matrix R1 = Matrix::Zero(3, 3);
        Matrix core = F1 + (F1 * lev2.J0 - lev2.J0 * F1) + R1;
        Matrix phi2 = lev2.G0 * core * lev2.G0.partialPivLu().inverse();
        CHECK(testutil::rel_err(phi2, ps.phi) < 1e-12);
    }

    SUBCASE("da coefficient has the pole part -A/(z-a)") {
        auto ps = build_pole_shifted(sys, Complex(0.5, 0));
        Complex z(2.0, 1.0);
        Matrix want = -sys.lambda.matrix() - sys.A / (z - Complex(0.5, 0));
        CHECK(testutil::rel_err(ps.da_coefficient(z), want) < 1e-14);
    }
}

TEST_CASE("translation-family pole-shifted Pfaffian is integrable") {
    // the full (z, lambda, a) system is the pullback of the unshifted one
    // under z -> z - a; cross-check d_a of the dz-coefficient against the
    // mixed structure at a few points
    BlockPartition part({1, 1});
    Matrix A = testutil::random_matrix(2, 53, 0.5);
    CoalescedSystem sys(Lambda({Complex(0, 0), Complex(1, 0)}, part), A);
    auto ps = build_pole_shifted(sys, Complex(0.3, 0.1));
    Complex z(1.7, -0.4), a(0.3, 0.1);
    double h = 1e-6;
    // d/da [Lambda + A/(z-a)] = -A... compare with finite difference of dz coefficient
    auto shifted = [&](Complex aa) { return Matrix(sys.lambda.matrix() + sys.A / (z - aa)); };
    Matrix dda = (shifted(a + h) - shifted(a - h)) / (2 * h);
    Matrix analytic = sys.A / ((z - a) * (z - a));
    CHECK(testutil::rel_err(dda, analytic) < 1e-8);
    CHECK(testutil::rel_err(ps.dz_coefficient(z), shifted(a)) < 1e-15);
}
