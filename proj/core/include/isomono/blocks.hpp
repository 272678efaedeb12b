#ifndef ISOMONO_BLOCKS_HPP
#define ISOMONO_BLOCKS_HPP

#include "isomono/types.hpp"
#include <optional>
#include <string>

namespace isomono {

// ---- block access -------------------------------------------------------

Matrix get_block(const Matrix& M, const BlockPartition& part, int a, int b);
void set_block(Matrix& M, const BlockPartition& part, int a, int b, const Matrix& B);

// block-diagonal part A_{[1,1]} + ... + A_{[s,s]} (zeros elsewhere)
Matrix block_diagonal_part(const Matrix& M, const BlockPartition& part);
Matrix block_offdiagonal_part(const Matrix& M, const BlockPartition& part);

// ---- spectra -------------------------------------------------------------

struct EigenCluster {
    Complex value;       // cluster representative (multiplicity-weighted mean)
    int multiplicity;
};

// Dense eigenvalues, clustered at cluster_tol, ordered lexicographically
// (by real part, then imaginary part).
std::vector<EigenCluster> spectrum(const Matrix& M, double cluster_tol);

// ---- Jordanization of the diagonal blocks --------------------------------

struct JordanizationOptions {
    double cluster_tol = 0.0;     // 0 -> 1e-8 * ||block||
    double rank_tol = 0.0;        // 0 -> tied to cluster_tol
    double jordan_cond_max = 1e10;
};

struct ResonancePair {
    int block;      // diagonal block k (0-based); -1 for global z=0 resonances
    int i, j;       // eigenvalue indices with mu_i - mu_j = ell
    long ell;       // the nonzero integer gap
};

struct JordanizationResult {
    BlockPartition partition;
    Matrix T;                                   // block-diagonal reducer
    Matrix J;                                   // Jordan form J_1 + ... + J_s
    std::vector<std::vector<Complex>> block_eigenvalues;   // per block, one per Jordan block
    std::vector<std::vector<int>> jordan_block_sizes;      // per block
    double reconstruction_residual = 0.0;       // ||T^-1 A_D T - J||_inf / ||A_D||_inf
    bool degraded_accuracy = false;             // cond(T) above jordan_cond_max
    std::string warning;

    bool diagonal() const;                      // J has no nilpotent part
    std::vector<Complex> eigenvalues_flat() const;  // per matrix row of J
};

// Jordanize every diagonal block A_{[k,k]}. Simple clusters take the plain
// eigenvector route; multiple eigenvalues go through rank-deficiency of
// (A-mu)^m powers and generalized eigenvector chains.
JordanizationResult jordanize_diag_blocks(const Matrix& A, const BlockPartition& part,
                                          const JordanizationOptions& opt = {});

// Full-matrix Jordanization = jordanize_diag_blocks with the trivial partition (n).
JordanizationResult jordanize(const Matrix& A, const JordanizationOptions& opt = {});

// Wrap externally supplied (T, J) as a JordanizationResult, validating the
// reconstruction residual (the exact-structure escape hatch).
JordanizationResult jordanization_from_given(const Matrix& A, const BlockPartition& part,
                                             const Matrix& T, const Matrix& J,
                                             double tol = 1e-8);

// ---- resonance detection ---------------------------------------------------

struct ResonanceReport {
    std::vector<ResonancePair> partial;   // within diagonal blocks (z=infinity data)
    std::vector<ResonancePair> global;    // mu_i - mu_j in Z\{0} across the whole spectrum
    bool partially_resonant() const { return !partial.empty(); }
};

ResonanceReport detect_resonances(const JordanizationResult& jr, double int_tol = 1e-7);

} // namespace isomono

#endif
