#include <doctest.h>

#include "isomono/blocks.hpp"
#include "test_util.hpp"

using namespace isomono;

TEST_CASE("get_block picks the addressed sub-block") {
    BlockPartition part({1, 2});
    Matrix M(3, 3);
    M << 1, 2, 3, 4, 5, 6, 7, 8, 9;
    Matrix B = get_block(M, part, 0, 1);
    REQUIRE(B.rows() == 1);
    REQUIRE(B.cols() == 2);
    CHECK(B(0, 0) == Complex(2, 0));
    CHECK(B(0, 1) == Complex(3, 0));

    Matrix I = Matrix::Identity(3, 3);
    CHECK(get_block(I, part, 1, 1) == Matrix::Identity(2, 2));

    CHECK_THROWS_AS(get_block(M, part, 0, 2), std::out_of_range);
}

TEST_CASE("block round-trip reassembles the matrix bit-exactly") {
    BlockPartition part({2, 1, 1});
    Matrix M = testutil::random_matrix(4, 11);
    Matrix R = Matrix::Zero(4, 4);
    for (int a = 0; a < part.s(); ++a)
        for (int b = 0; b < part.s(); ++b)
            set_block(R, part, a, b, get_block(M, part, a, b));
    CHECK(R == M);   // exact
}

TEST_CASE("spectrum clusters nearby eigenvalues") {
    Matrix M = Matrix::Zero(3, 3);
    M(0, 0) = 1.0;
    M(1, 1) = 1.0 + 1e-14;
    M(2, 2) = 2.0;
    auto cl = spectrum(M, 1e-10);
    REQUIRE(cl.size() == 2);
    CHECK(cl[0].multiplicity == 2);
    CHECK(std::abs(cl[0].value - Complex(1, 0)) < 1e-13);
    CHECK(cl[1].multiplicity == 1);
}

TEST_CASE("spectrum of the canonical nilpotent") {
    Matrix M = Matrix::Zero(2, 2);
    M(0, 1) = 1.0;
    auto cl = spectrum(M, 1e-7);
    REQUIRE(cl.size() == 1);
    CHECK(cl[0].multiplicity == 2);
    CHECK(std::abs(cl[0].value) < 1e-7);
}

TEST_CASE("spectrum is permutation-invariant with exact multiplicities") {
    Matrix M = testutil::random_matrix(5, 3);
    // permutation (0 1 2 3 4) -> (3 0 4 1 2)
    Eigen::PermutationMatrix<Eigen::Dynamic> P(5);
    P.indices() << 3, 0, 4, 1, 2;
    Matrix Mp = P.transpose() * M * P;
    auto a = spectrum(M, 1e-10);
    auto b = spectrum(Mp, 1e-10);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].multiplicity == b[i].multiplicity);
        CHECK(std::abs(a[i].value - b[i].value) < 1e-10);
    }
}

TEST_CASE("clustering monotonicity: larger tolerance never increases cluster count") {
    Matrix M = testutil::random_matrix(6, 7);
    std::size_t prev = spectrum(M, 1e-14).size();
    for (double tol : {1e-10, 1e-6, 1e-2, 1.0, 10.0}) {
        std::size_t cur = spectrum(M, tol).size();
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("jordanize: diagonal block with distinct entries stays diagonal") {
    BlockPartition part({3});
    Matrix A = Matrix::Zero(3, 3);
    A(0, 0) = Complex(0.5, 0);
    A(1, 1) = Complex(-1.0, 0.2);
    A(2, 2) = Complex(2.0, 0);
    auto jr = jordanize_diag_blocks(A, part);
    CHECK(jr.reconstruction_residual < 1e-12);
    CHECK(jr.diagonal());
    // eigenvalues in lexicographic order on the diagonal of J
    CHECK(std::abs(jr.J(0, 0) - Complex(-1.0, 0.2)) < 1e-12);
    CHECK(std::abs(jr.J(2, 2) - Complex(2.0, 0)) < 1e-12);
}

TEST_CASE("jordanize: the 3D example block [[0,1],[rho^2,0]]") {
    // A23 = 1, A32 = 1/4: eigenvalues +-1/2
    BlockPartition part({2});
    Matrix B(2, 2);
    B << 0, 1, 0.25, 0;
    auto jr = jordanize_diag_blocks(B, part);
    CHECK(jr.reconstruction_residual < 1e-12);
    REQUIRE(jr.block_eigenvalues[0].size() == 2);
    CHECK(std::abs(jr.J(0, 0) - Complex(-0.5, 0)) < 1e-12);
    CHECK(std::abs(jr.J(1, 1) - Complex(0.5, 0)) < 1e-12);
    // columns proportional to (A23, +-sqrt(A23 A32)) ~ the paper's particular reducer
    Matrix T = jr.T;
    CHECK(std::abs(T(0, 1) / T(1, 1) - Complex(2.0, 0)) < 1e-10);    // (1, 1/2) direction
    CHECK(std::abs(T(0, 0) / T(1, 0) + Complex(2.0, 0)) < 1e-10);    // (1, -1/2) direction
}

TEST_CASE("jordanize: canonical nilpotent gives one size-2 chain") {
    BlockPartition part({2});
    Matrix B = Matrix::Zero(2, 2);
    B(0, 1) = 1.0;
    auto jr = jordanize_diag_blocks(B, part);
    REQUIRE(jr.jordan_block_sizes[0] == std::vector<int>{2});
    CHECK(std::abs(jr.J(0, 1) - Complex(1, 0)) < 1e-12);
    CHECK(std::abs(jr.J(0, 0)) < 1e-8);
    CHECK(jr.reconstruction_residual < 1e-10);
}

TEST_CASE("jordanize reconstruction residual on random block-diagonal input") {
    BlockPartition part({2, 3, 1});
    Matrix A = testutil::random_matrix(6, 21);
    auto jr = jordanize_diag_blocks(A, part);
    CHECK(jr.reconstruction_residual < 1e-10);
    // T is block-diagonal
    CHECK(max_abs(block_offdiagonal_part(jr.T, part)) == 0.0);
}

TEST_CASE("jordanize handles a size-3 Jordan chain") {
    BlockPartition part({3});
    // J with one eigenvalue and a full chain, conjugated by a fixed matrix
    Matrix J = Matrix::Zero(3, 3);
    J(0, 0) = J(1, 1) = J(2, 2) = Complex(0.7, -0.1);
    J(0, 1) = J(1, 2) = 1.0;
    Matrix S(3, 3);
    S << 1, 2, 0, 0, 1, 1, 1, 0, 3;
    Matrix A = S * J * S.inverse();
    auto jr = jordanize_diag_blocks(A, part);
    REQUIRE(jr.jordan_block_sizes[0] == std::vector<int>{3});
    CHECK(jr.reconstruction_residual < 1e-7);
}

TEST_CASE("exact-structure escape hatch validates the supplied pair") {
    BlockPartition part({2});
    Matrix B(2, 2);
    B << 0, 1, 0.25, 0;
    Matrix T(2, 2);
    T << 2, -2, 1, 1;   // columns (2,1), (-2,1)
    Matrix J = Matrix::Zero(2, 2);
    J(0, 0) = 0.5;
    J(1, 1) = -0.5;
    auto jr = jordanization_from_given(B, part, T, J);
    CHECK(jr.reconstruction_residual < 1e-14);

    Matrix Jbad = J;
    Jbad(0, 0) = 0.6;
    CHECK_THROWS(jordanization_from_given(B, part, T, Jbad));
}

TEST_CASE("detect_resonances") {
    SUBCASE("no resonance for non-integer gaps") {
        Matrix A = Matrix::Zero(2, 2);
        A(0, 0) = Complex(0.3, 0);
        A(1, 1) = Complex(0.3, 1.0);
        auto jr = jordanize(A);
        auto rep = detect_resonances(jr);
        CHECK(rep.partial.empty());
        CHECK(rep.global.empty());
    }
    SUBCASE("integer gap inside a block") {
        Matrix A = Matrix::Zero(2, 2);
        A(1, 1) = 1.0;
        auto jr = jordanize(A);
        auto rep = detect_resonances(jr);
        REQUIRE_FALSE(rep.partial.empty());
        CHECK(rep.partial[0].ell == 1);
        CHECK(rep.partially_resonant());
    }
    SUBCASE("3D example block: +-rho resonant iff 2 rho integer (rho = 1/2)") {
        Matrix B(2, 2);
        B << 0, 1, 0.25, 0;
        BlockPartition part({2});
        auto jr = jordanize_diag_blocks(B, part);
        auto rep = detect_resonances(jr);
        REQUIRE_FALSE(rep.partial.empty());
        CHECK(std::labs(rep.partial[0].ell) == 1);
    }
}
