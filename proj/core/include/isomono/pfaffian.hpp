#ifndef ISOMONO_PFAFFIAN_HPP
#define ISOMONO_PFAFFIAN_HPP

#include "isomono/blocks.hpp"
#include "isomono/types.hpp"
#include <functional>
#include <optional>

namespace isomono {

// How the block-diagonal coefficients D_j of the deformation are supplied:
// zero (constant-T deformations), explicit constant matrices, generated as
// d_jT * T^-1 by finite differences of a T(lambda) evaluator, or a closed-form
// callback.
struct DSpec {
    enum class Kind { Zero, Explicit, TDerived, Callback };
    Kind kind = Kind::Zero;
    std::vector<Matrix> explicit_D;
    std::function<Matrix(const std::vector<Complex>&)> T_eval;
    std::function<std::vector<Matrix>(const std::vector<Complex>&)> callback;
    double fd_step = 1e-6;

    static DSpec zero() { return {}; }
    static DSpec explicit_matrices(std::vector<Matrix> D);
    static DSpec t_derived(std::function<Matrix(const std::vector<Complex>&)> T, double h = 1e-6);
    static DSpec from_callback(std::function<std::vector<Matrix>(const std::vector<Complex>&)> f);

    // the s matrices D_j at lambda
    std::vector<Matrix> eval(const std::vector<Complex>& lambda, int s, int n) const;
    bool is_zero() const { return kind == Kind::Zero; }
};

// The system dY/dz = (Lambda + A/z) Y with its deformation data.
struct CoalescedSystem {
    Lambda lambda;
    Matrix A;
    std::optional<JordanizationResult> reducer;
    DSpec dspec;
    double eig_sep_tol = 1e-10;

    CoalescedSystem(Lambda lam, Matrix a, DSpec d = DSpec::zero())
        : lambda(std::move(lam)), A(std::move(a)), dspec(std::move(d)) {
        if (A.rows() != lambda.partition.n() || A.cols() != lambda.partition.n())
            throw std::invalid_argument("CoalescedSystem: A does not match the partition");
        if (!is_finite(A)) throw std::invalid_argument("CoalescedSystem: A has non-finite entries");
    }

    int n() const { return lambda.partition.n(); }
    int s() const { return lambda.partition.s(); }
    const BlockPartition& partition() const { return lambda.partition; }

    // reducer, computing it on demand
    const JordanizationResult& jordanization() const;

private:
    mutable std::optional<JordanizationResult> cached_;
};

// Coefficients of the deformation one-form at a fixed lambda.
struct PfaffianForm {
    CoalescedSystem system;
    std::vector<Matrix> omegas;        // omega_j, zero diagonal blocks
    std::vector<Matrix> dmats;         // D_j (block-diagonal)
    std::vector<Matrix> omega_tildes;  // omega_j + D_j
    std::vector<Matrix> e_projectors;  // E_{p_j}
};

// omega_j with blocks A_{[a,b]}(delta_aj - delta_bj)/(lambda_a - lambda_b),
// zero diagonal blocks.
std::vector<Matrix> build_omega(const CoalescedSystem& sys);

PfaffianForm build_pfaffian(const CoalescedSystem& sys);

// Coefficient of dz (direction 0) or dlambda_j (direction j = 1..s) at (z, lambda).
Matrix assemble_oneform(const PfaffianForm& form, Complex z, int direction);

struct LinearConstraintReport {
    double lambda_commutator_residual = 0.0;   // max_j ||[Lambda, ot_j] - [E_j, A]||
    double cross_commutator_residual = 0.0;    // max_{j,k} ||[E_j, ot_k] - [E_k, ot_j]||
    double scale = 1.0;                        // normalization ||A|| etc.
    double tolerance = 1e-12;
    bool pass = false;
    double relative() const {
        return std::max(lambda_commutator_residual, cross_commutator_residual) / scale;
    }
};

LinearConstraintReport check_linear_constraints(const PfaffianForm& form, double tol = 1e-12);

// Finite-difference curl of the lambda-components: d_i ot_j - d_j ot_i - [ot_i, ot_j]
// for all pairs, the block-diagonal D-curl separately, and the O(h^2) Richardson
// ratio from steps h and h/2.
struct CurlReport {
    double max_residual_h = 0.0;
    double max_residual_h2 = 0.0;     // at step h/2
    double richardson_ratio = 0.0;    // ~4 for O(h^2) convergence
    double d_curl_residual_h = 0.0;
    double d_curl_residual_h2 = 0.0;
    double step = 0.0;
};

using PfaffianFlow = std::function<PfaffianForm(const std::vector<Complex>&)>;

CurlReport curl_residual(const PfaffianFlow& flow, const std::vector<Complex>& lambda0, double h);

// Pole-shifted variant: dY/dz = (Lambda + A/(z-a)) Y with the pole itself a
// deformation parameter. phi per the G-equation of the shifted Levelt data.
struct PoleShiftedForm {
    PfaffianForm base;
    Complex pole;
    Matrix phi;   // G0 (F1 + [F1, J0] + R1) G0^-1 of the system at the shifted origin

    Matrix dz_coefficient(Complex z) const;      // Lambda + A/(z-a)
    Matrix dlambda_coefficient(Complex z, int j) const;  // (z-a) E_{p_j} + ot_j
    Matrix da_coefficient(Complex z) const;      // -Lambda - A/(z-a)
};

PoleShiftedForm build_pole_shifted(const CoalescedSystem& sys, Complex a, int K = 12);

} // namespace isomono

#endif
