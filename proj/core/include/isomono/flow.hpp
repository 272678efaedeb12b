#ifndef ISOMONO_FLOW_HPP
#define ISOMONO_FLOW_HPP

#include "isomono/ode.hpp"
#include "isomono/pfaffian.hpp"

namespace isomono {

// Piecewise-linear path in C^s given by waypoints. Stratum margin is exact on
// segments (the minimum of |linear in t| over [0,1] is closed-form).
struct DeformationPath {
    std::vector<std::vector<Complex>> waypoints;

    int s() const { return waypoints.empty() ? 0 : static_cast<int>(waypoints.front().size()); }
    int segments() const { return static_cast<int>(waypoints.size()) - 1; }
    std::vector<Complex> at(double t) const;                 // t in [0, 1] over the whole path
    std::vector<Complex> velocity(int segment) const;        // d lambda / d t_local
    double stratum_margin() const;                           // min over segments and pairs
    bool closed(double tol = 0.0) const;

    static DeformationPath line(std::vector<Complex> from, std::vector<Complex> to);
};

struct FlowSample {
    double t;                        // global time in [0, 1]
    std::vector<Complex> lambda;
    Matrix A;
};

struct FlowMonitors {
    double spectrum_drift = 0.0;       // max Hausdorff-type eigenvalue drift
    double diag_block_drift = 0.0;     // max_k ||A_kk(t) - A_kk(0)|| (meaningful for D = 0)
    double closure_error = -1.0;       // ||A(1) - A(0)|| for closed paths, else -1
    double min_stratum_margin = 0.0;
    bool flagged = false;              // some monitor breached monitor_fail
};

struct FlowResult {
    std::vector<FlowSample> samples;
    FlowMonitors monitors;
    OdeStats stats;
    DSpec dspec;
    DeformationPath path;

    const Matrix& final_A() const { return samples.back().A; }
};

struct FlowOptions {
    double rtol = 1e-11;
    double atol = 1e-14;
    double monitor_fail = 1e-6;
    double eig_sep_tol = 1e-10;
    bool record_samples = true;
    int max_recorded_samples = 4000;
};

// dA for a direction dlambda in C^s: [sum_j ot_j dlambda_j, A]
Matrix deformation_rhs(const Matrix& A, const Lambda& lambda, const std::vector<Complex>& dlambda,
                       const DSpec& dspec);

// Integrate dA/dt = [sum_j ot_j(lambda(t)) lambdadot_j(t), A] along the path.
FlowResult integrate_flow(const Matrix& A0, const BlockPartition& part, const DeformationPath& path,
                          const DSpec& dspec, const FlowOptions& opt = {});

// Conjugation relating deformations with different Jordanizers:
// Acheck = Tcheck (T^-1 A T) Tcheck^-1, same for every omega_j.
struct GaugeResult {
    Matrix A;
    std::vector<Matrix> omegas;
    double diag_agreement;   // || blockdiag(Acheck) - blockdiag(A) ||
};

GaugeResult gauge_transform(const Matrix& A, const std::vector<Matrix>& omegas,
                            const BlockPartition& part, const Matrix& T, const Matrix& Tcheck);

// Integrate dT = (sum_j D_j dlambda_j) T together with dA_D = [D, A_D];
// certifies T^-1 A_D T constant and [T^-1 dT, J] = 0 at samples.
struct TFlowResult {
    std::vector<double> t;
    std::vector<Matrix> T;
    Matrix final_T;
    double jordan_drift = 0.0;         // max ||T^-1 A_D T - J_ref||
    double commutator_residual = 0.0;  // max ||[T^-1 dT, J]|| over samples
    OdeStats stats;
};

TFlowResult t_flow(const Matrix& A0, const Matrix& T0, const BlockPartition& part,
                   const DeformationPath& path, const DSpec& dspec, const FlowOptions& opt = {});

} // namespace isomono

#endif
