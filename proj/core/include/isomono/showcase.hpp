#ifndef ISOMONO_SHOWCASE_HPP
#define ISOMONO_SHOWCASE_HPP

#include "isomono/flow.hpp"

namespace isomono {

// The 3x3 rigid case: Lambda = diag(lambda_1, lambda_2, lambda_2), zero
// diagonal, constant A_23, A_32 with A_23 A_32 != 0, closed-form off-blocks.
struct ThreeDExample {
    Complex A23{1.0, 0.0};
    Complex A32{0.25, 0.0};
    Complex c1{1.0, 0.0}, c2{0.0, 0.0}, c3{0.0, 0.0}, c4{1.0, 0.0};
    Complex a0{1.0, 0.0}, b0{1.0, 0.0}, c0{1.0, 0.0};

    Complex rho() const { return std::sqrt(A23 * A32); }
    BlockPartition partition() const { return BlockPartition({1, 2}); }

    void validate() const {
        if (A23 * A32 == Complex(0.0, 0.0))
            throw std::invalid_argument("ThreeDExample: A23*A32 must be nonzero");
    }
};

// A(x) with A_12 = c1 x^rho + c2 x^-rho etc. (principal branch), x != 0
Matrix example3d_closed_form(const ThreeDExample& ex, Complex x);

// T(x) = T0_particular * diag(a0, b0 x^rho a0, c0 x^-rho a0)
Matrix example3d_T(const ThreeDExample& ex, Complex x);
Matrix example3d_T0_particular(const ThreeDExample& ex);

// closed-form D(x) = T'(x) T(x)^-1 for the single deformation direction x
Matrix example3d_D_of_x(const ThreeDExample& ex, Complex x);

// the system at lambda = (x, 0): Lambda = diag(x, 0, 0), partition (1, 2)
CoalescedSystem example3d_system(const ThreeDExample& ex, Complex x, DSpec dspec = DSpec::zero());

// omega_1(x) = (1/x) [[0, A12, A13], [A21, 0, 0], [A31, 0, 0]]
Matrix example3d_omega1(const Matrix& A, Complex x);

// ---- the 4-dimensional case (1): Lambda = diag(l1, l1, l2, l3) -----------------

// omega-hat_2 of the reduced x-system, partition (2,1,1), zero diagonal blocks
Matrix omega_hat_4d(const Matrix& A4, Complex x);

// RHS of the reduced system dA/dx = [omega-hat_2, A]
Matrix flow4d_rhs(const Matrix& A4, Complex x);

// integrate the reduced 4d system along real x from x0 to x1
Matrix flow4d_integrate(Matrix A0, double x0, double x1, double rtol = 1e-12,
                        OdeStats* stats = nullptr);

// skew-symmetric A4 from the five independent entries
Matrix skew4_from_phis(const std::array<Complex, 5>& phi);

// ---- the Omega-system (Painleve VI flow) -----------------------------------------

struct OmegaState {
    Complex O1, O2, O3;
    Complex x;
    Complex quadratic() const { return O1 * O1 + O2 * O2 + O3 * O3; }
};

// (O2 O3 / x, O1 O3 / (1-x), O1 O2 / (x(x-1)))
std::array<Complex, 3> pvi_rhs(const OmegaState& st);

OmegaState pvi_integrate(OmegaState st, Complex x1, double rtol = 1e-12, OdeStats* stats = nullptr);

// embedding of the restricted skew flow: Omega = (-i phi5, sqrt2 phi1, i sqrt2 phi3)
OmegaState omega_from_phis(const std::array<Complex, 5>& phi, Complex x);

} // namespace isomono

#endif
