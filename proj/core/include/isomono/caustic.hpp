#ifndef ISOMONO_CAUSTIC_HPP
#define ISOMONO_CAUSTIC_HPP

#include "isomono/pfaffian.hpp"

namespace isomono {

// Caustic model of a Dubrovin-Frobenius manifold near a generic point where
// two canonical coordinates merge (t_2 = 0). The metric data eta~_11, eta~_12
// are supplied as evaluators (holomorphic near t_2 = 0); eta~_22 is forced to
// t_2^{m-2} eta~_11.
struct CausticModel {
    int m = 3;                       // >= 2
    int n = 4;                       // total dimension (>= 3)
    std::function<Complex(Complex t1, Complex t2)> eta11 = [](Complex, Complex) {
        return Complex(0.3, 0.0);
    };
    std::function<Complex(Complex t1, Complex t2)> eta12 = [](Complex, Complex) {
        return Complex(1.0, 0.0);
    };
    // d/dt2 of the metric entries (the model is a truncated power series in
    // t2, so these are analytic, not finite-difference)
    std::function<Complex(Complex t1, Complex t2)> eta11_dt2 = [](Complex, Complex) {
        return Complex(0.0, 0.0);
    };
    std::function<Complex(Complex t1, Complex t2)> eta12_dt2 = [](Complex, Complex) {
        return Complex(0.0, 0.0);
    };
    Complex v12_ring() const { return Complex(0.0, double(m - 2) / (2.0 * m)); }

    void validate() const;
};

// u_1 = t_1 + (2/m) t_2^{m/2}, u_2 = t_1 - (2/m) t_2^{m/2} and the inverse
// (principal branches)
std::pair<Complex, Complex> caustic_coords(Complex t1, Complex t2, int m);
std::pair<Complex, Complex> caustic_coords_inverse(Complex u1, Complex u2, int m);

// U-hat = [[t1, (2/m) t2^{m-1}], [(2/m) t2, t1]]
Matrix caustic_U_hat(Complex t1, Complex t2, int m);

// Psi = Psi-hat + I_{n-2} with Psi-hat from (a, b), a^2 = eta12 + t2^{(m-2)/2} eta11,
// b^2 = eta12 - t2^{(m-2)/2} eta11. Certificates (Gram and diagonalization)
// are returned alongside.
struct CausticPsi {
    Matrix Psi;
    Complex a, b;
    double gram_residual;            // || Psi^T Psi - metric Gram ||
    double diagonalization_residual; // off-diagonal of Psi U Psi^-1
};

CausticPsi caustic_psi(const CausticModel& model, Complex t1, Complex t2,
                       const std::vector<Complex>& u_rest = {});

// the 2x2 block V_[1,1] at t_2 = 0 (separate formulas for m >= 3 and m = 2);
// eigenvalues +- i V12_ring
Matrix caustic_v11_limit(const CausticModel& model, Complex t1 = Complex(0.0, 0.0));

// restricted Pfaffian system at the caustic: Lambda = diag(t1, t1, u3, ..., un)
// with partition (2, 1, ..., 1) and A = V|_{t2=0}
struct CausticRestricted {
    CoalescedSystem system;
    PfaffianForm form;
    Matrix T;            // T_1 + diag(h) per the caustic reducer formula
    Matrix T1;           // the 2x2 factor
};

CausticRestricted caustic_restricted_system(const CausticModel& model, Complex t1,
                                            const std::vector<Complex>& u_rest,
                                            const Matrix& offdiag,
                                            Complex c1 = Complex(1.0, 0.0),
                                            Complex c2 = Complex(1.0, 0.0));

// the conjugated deformation fields V_2 = Psi^-1(V_1+V_2)Psi and
// V_j = Psi^-1 V_j Psi at finite t2 (for the limit certification against
// build_omega)
Matrix caustic_conjugated_field(const CausticModel& model, Complex t1, Complex t2,
                                const std::vector<Complex>& u_rest, const Matrix& offdiag, int j);

// boundedness scan of t2^{(m-2)/2} Psi^-1 (V_1 - V_2) Psi - Psi^-1 dPsi/dt2
// for candidate V12_ring values on a geometric t2-grid
struct VringVerdict {
    Complex candidate;
    double growth_exponent;   // slope of log||M|| against log(1/t2); ~0 bounded, ~1 divergent
    bool bounded;
};

struct VringScan {
    std::vector<VringVerdict> verdicts;
    std::vector<double> grid;
};

VringScan vring_scan(const CausticModel& model, const std::vector<Complex>& candidates,
                     const std::vector<double>& t2_grid, double fit_tol = 0.3);

} // namespace isomono

#endif
