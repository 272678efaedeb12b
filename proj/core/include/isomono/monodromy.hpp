#ifndef ISOMONO_MONODROMY_HPP
#define ISOMONO_MONODROMY_HPP

#include "isomono/flow.hpp"
#include "isomono/infinity.hpp"

namespace isomono {

// Monodromy of the Levelt solution around z=0, by one counterclockwise loop
// of ODE propagation at radius r, cross-checked against e^{2 pi i L0}.
struct MonodromyAtZero {
    Matrix M0;
    double vs_exponent_residual;   // || M0 - e^{2 pi i L0} ||
    OdeStats stats;
};

MonodromyAtZero monodromy_at_zero(const CoalescedSystem& sys, const LeveltData& lev, double r = 0.4,
                                  double rtol = 1e-12);

// Stokes matrices S_nu = Y_nu^-1 Y_{nu+1} on overlap points; nu in {0, 1}.
struct StokesPair {
    Matrix S0, S1;
    double spread0, spread1;          // z-independence spread across eval points
    double unipotency_residual;       // diag deviation from 1 plus structural zeros
    double eps_budget;
    OdeStats stats;
};

struct StokesOptions {
    double eval_scale = 8.0;          // |Delta lambda| * r_eval
    int eval_points = 3;
    SectorOptions sector;
};

StokesPair stokes_matrices(const CoalescedSystem& sys, const StokesGeometry& geom,
                           const FormalInfinityData& fd, const StokesOptions& opt = {});

// Central connection matrix Y_0 = Y^(0) C0 on an annulus.
struct CentralConnection {
    Matrix C0;
    double spread;
    double annulus_radius;
    OdeStats stats;
};

struct ConnectionOptions {
    double annulus_radius = 0.0;   // 0 -> automatic
    int samples = 4;
    double rtol = 1e-12;
    SectorOptions sector;
};

CentralConnection central_connection(const CoalescedSystem& sys, const LeveltData& lev,
                                     const StokesGeometry& geom, const FormalInfinityData& fd,
                                     const ConnectionOptions& opt = {});

// ---- the audit ------------------------------------------------------------------

struct MonodromyData {
    std::vector<long> D0;
    Matrix L0;
    std::vector<long> D;
    Matrix L;
    Matrix S0, S1;
    Matrix C0;
    Matrix M0;
    double eps_budget = 0.0;
};

MonodromyData extract_monodromy(const CoalescedSystem& sys, const StokesGeometry& geom,
                                const LeveltOptions& lopt, const FormalOptions& fopt,
                                const StokesOptions& sopt, const ConnectionOptions& copt);

struct AuditItem {
    std::string name;
    double deviation;
    double tolerance;
    bool pass;
    bool failed_to_extract = false;
};

struct IsomonodromyAudit {
    std::vector<std::vector<Complex>> lambda_samples;
    std::vector<AuditItem> items;
    bool pass = false;
    double eps_budget = 0.0;
};

struct AuditOptions {
    int sample_count = 3;
    double tolerance = 1e-6;
    int levelt_K = 14;
    int formal_K = 10;
    double rtol = 1e-12;
    double int_tol = 1e-7;
};

// Strong-isomonodromy audit along a flow: monodromy data at sample_count
// lambda-points, with the Levelt frame G0 and the reducer T carried along the
// flow (dG = sum_j ot_j dlambda_j G) so the comparison is normalization-stable.
IsomonodromyAudit verify_strong_isomonodromy(const FlowResult& flow, const BlockPartition& part,
                                             const AuditOptions& opt = {});

} // namespace isomono

#endif
