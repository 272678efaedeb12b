#ifndef ISOMONO_ODE_HPP
#define ISOMONO_ODE_HPP

#include "isomono/types.hpp"
#include <functional>

namespace isomono {

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-13;
    double initial_step = 0.0;    // 0 -> automatic
    double min_step_factor = 1e-14;
    long max_steps = 2'000'000;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evaluations = 0;

    OdeStats& operator+=(const OdeStats& o) {
        accepted += o.accepted;
        rejected += o.rejected;
        rhs_evaluations += o.rhs_evaluations;
        return *this;
    }
};

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dy)>;
using OdeObserver = std::function<void(double t, const Vector& y)>;

// Adaptive Dormand-Prince 5(4). Integrates y' = f(t, y) from t0 to t1
// (t1 may be < t0). Throws on step-size collapse or step budget exhaustion.
// The observer, when given, fires after every accepted step.
Vector integrate_ode(const OdeRhs& f, double t0, double t1, Vector y0,
                     const OdeOptions& opt, OdeStats* stats = nullptr,
                     const OdeObserver& observer = {});

// Matrix ODE dY/dz = C(z) Y along the polyline z0 -> z1 -> ... (straight
// segments in the z-plane). C is the coefficient evaluated at z.
using MatrixCoeff = std::function<Matrix(Complex z)>;

Matrix integrate_matrix_ode_path(const MatrixCoeff& C, const std::vector<Complex>& zpath,
                                 Matrix Y0, const OdeOptions& opt, OdeStats* stats = nullptr);

// Column ODE du/dz = C(z) u along a polyline.
using VectorCoeff = std::function<Matrix(Complex z)>;
Vector integrate_vector_ode_path(const MatrixCoeff& C, const std::vector<Complex>& zpath,
                                 Vector u0, const OdeOptions& opt, OdeStats* stats = nullptr);

} // namespace isomono

#endif
