#include "isomono/blocks.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace isomono {

Matrix get_block(const Matrix& M, const BlockPartition& part, int a, int b) {
    if (a < 0 || a >= part.s() || b < 0 || b >= part.s())
        throw std::out_of_range("get_block: block index out of range");
    if (M.rows() != part.n() || M.cols() != part.n())
        throw std::invalid_argument("get_block: matrix does not match partition");
    return M.block(part.offset(a), part.offset(b), part.size(a), part.size(b));
}

void set_block(Matrix& M, const BlockPartition& part, int a, int b, const Matrix& B) {
    if (a < 0 || a >= part.s() || b < 0 || b >= part.s())
        throw std::out_of_range("set_block: block index out of range");
    if (B.rows() != part.size(a) || B.cols() != part.size(b))
        throw std::invalid_argument("set_block: block has wrong shape");
    M.block(part.offset(a), part.offset(b), part.size(a), part.size(b)) = B;
}

Matrix block_diagonal_part(const Matrix& M, const BlockPartition& part) {
    Matrix D = Matrix::Zero(M.rows(), M.cols());
    for (int a = 0; a < part.s(); ++a)
        D.block(part.offset(a), part.offset(a), part.size(a), part.size(a)) =
            M.block(part.offset(a), part.offset(a), part.size(a), part.size(a));
    return D;
}

Matrix block_offdiagonal_part(const Matrix& M, const BlockPartition& part) {
    return M - block_diagonal_part(M, part);
}

static bool lex_less(const Complex& x, const Complex& y) {
    if (x.real() != y.real()) return x.real() < y.real();
    return x.imag() < y.imag();
}

std::vector<EigenCluster> spectrum(const Matrix& M, double cluster_tol) {
    if (!is_finite(M))
        throw std::invalid_argument("spectrum: matrix has non-finite entries");
    Eigen::ComplexEigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("spectrum: eigenvalue solver did not converge");
    std::vector<Complex> ev(es.eigenvalues().data(), es.eigenvalues().data() + M.rows());
    std::sort(ev.begin(), ev.end(), lex_less);

    std::vector<EigenCluster> out;
    std::size_t i = 0;
    while (i < ev.size()) {
        Complex sum = ev[i];
        int mult = 1;
        std::size_t j = i + 1;
        // greedy chain clustering in lexicographic order
        while (j < ev.size() && std::abs(ev[j] - sum / double(mult)) <= cluster_tol) {
            sum += ev[j];
            ++mult;
            ++j;
        }
        out.push_back({sum / double(mult), mult});
        i = j;
    }
    return out;
}

// ---- Jordan machinery ------------------------------------------------------

namespace {

int numeric_rank(const Matrix& M, double tol) {
    if (M.rows() == 0 || M.cols() == 0) return 0;
    Eigen::JacobiSVD<Matrix> svd(M);
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return r;
}

// orthonormal basis of the kernel of M at tolerance tol (columns)
Matrix kernel_basis(const Matrix& M, double tol) {
    Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
    int n = static_cast<int>(M.cols());
    int r = 0;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++r;
    return svd.matrixV().rightCols(n - r);
}

// component of v orthogonal to span(B) (B orthonormal columns not required)
Vector project_out(const Vector& v, const Matrix& B) {
    if (B.cols() == 0) return v;
    Eigen::HouseholderQR<Matrix> qr(B);
    Matrix Q = qr.householderQ() * Matrix::Identity(B.rows(), std::min(B.rows(), B.cols()));
    int r = numeric_rank(B, 1e-12 * std::max(1.0, max_abs(B)));
    Q = Q.leftCols(r);
    return v - Q * (Q.adjoint() * v);
}

// normalize so the first component with |.| > thresh*max equals 1
void normalize_leading(Vector& v) {
    double m = v.cwiseAbs().maxCoeff();
    if (m == 0.0) return;
    for (int i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 0.5 * m) {
            v /= v(i);
            return;
        }
    }
}

struct BlockJordan {
    Matrix T, J;
    std::vector<Complex> eigs;        // one per Jordan block
    std::vector<int> sizes;           // Jordan block sizes
};

// Jordanize one square block. Clusters of multiplicity one take eigenvectors;
// clusters of higher multiplicity go through kernels of (B - mu)^m.
BlockJordan jordanize_block(const Matrix& B, double cluster_tol, double rank_tol) {
    int p = static_cast<int>(B.rows());
    BlockJordan out;
    out.T = Matrix::Zero(p, p);
    out.J = Matrix::Zero(p, p);

    auto clusters = spectrum(B, cluster_tol);

    Eigen::ComplexEigenSolver<Matrix> es(B, /*computeEigenvectors=*/true);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("jordanize: eigenvalue solver did not converge");

    int col = 0;
    for (const auto& cl : clusters) {
        if (cl.multiplicity == 1) {
            // pick the eigenvector whose eigenvalue is closest to the cluster
            int best = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (int i = 0; i < p; ++i) {
                double d = std::abs(es.eigenvalues()(i) - cl.value);
                if (d < bd) { bd = d; best = i; }
            }
            Vector v = es.eigenvectors().col(best);
            normalize_leading(v);
            out.T.col(col) = v;
            out.J(col, col) = cl.value;
            out.eigs.push_back(cl.value);
            out.sizes.push_back(1);
            ++col;
            continue;
        }

        // multiple eigenvalue: Jordan structure from rank deficiency of powers
        Matrix N = B - cl.value * Matrix::Identity(p, p);
        double scale = std::max(1.0, max_abs(N));
        double ktol = rank_tol * scale;

        std::vector<int> kdim;       // kdim[m] = dim ker N^{m+1}
        std::vector<Matrix> kbas;
        Matrix P = Matrix::Identity(p, p);
        int mmax = 0;
        while (true) {
            P = N * P;
            kbas.push_back(kernel_basis(P, ktol));
            kdim.push_back(static_cast<int>(kbas.back().cols()));
            ++mmax;
            if (kdim.back() >= cl.multiplicity || mmax >= p) break;
        }
        // chains of length >= m: kdim[m-1] - kdim[m-2]
        auto dimk = [&](int m) { return m <= 0 ? 0 : (m <= mmax ? kdim[static_cast<std::size_t>(m) - 1] : kdim.back()); };

        std::vector<Vector> used;     // all chain vectors placed so far (this cluster)
        auto used_matrix = [&]() {
            Matrix U(p, static_cast<Eigen::Index>(used.size()));
            for (std::size_t i = 0; i < used.size(); ++i) U.col(static_cast<Eigen::Index>(i)) = used[i];
            return U;
        };

        for (int m = mmax; m >= 1; --m) {
            int want = (dimk(m) - dimk(m - 1)) - (dimk(m + 1) - dimk(m)); // blocks of size exactly m
            for (int c = 0; c < want; ++c) {
                // seed in ker N^m independent of ker N^{m-1} and of existing chains
                Matrix avoid(p, 0);
                if (m >= 2) avoid = kbas[static_cast<std::size_t>(m) - 2];
                Matrix U = used_matrix();
                Matrix avoid2(p, avoid.cols() + U.cols());
                avoid2 << avoid, U;

                const Matrix& Km = kbas[static_cast<std::size_t>(m) - 1];
                Vector seed = Vector::Zero(p);
                double bestnorm = -1.0;
                for (int i = 0; i < Km.cols(); ++i) {
                    Vector r = project_out(Km.col(i), avoid2);
                    if (r.norm() > bestnorm) { bestnorm = r.norm(); seed = r; }
                }
                if (bestnorm < ktol)
                    throw std::runtime_error("jordanize: failed to complete a Jordan chain (ill-conditioned structure)");
                seed /= seed.norm();

                // chain columns: N^{m-1} seed, ..., N seed, seed
                std::vector<Vector> chain(static_cast<std::size_t>(m));
                chain[static_cast<std::size_t>(m) - 1] = seed;
                for (int q = m - 2; q >= 0; --q)
                    chain[static_cast<std::size_t>(q)] = N * chain[static_cast<std::size_t>(q) + 1];

                Vector lead = chain[0];
                normalize_leading(lead);
                Complex scale_fix = chain[0].cwiseAbs().maxCoeff() > 0 ? Complex(1.0, 0.0) : Complex(1.0, 0.0);
                (void)scale_fix;

                for (int q = 0; q < m; ++q) {
                    out.T.col(col + q) = chain[static_cast<std::size_t>(q)];
                    out.J(col + q, col + q) = cl.value;
                    if (q + 1 < m) out.J(col + q, col + q + 1) = 1.0;
                    used.push_back(chain[static_cast<std::size_t>(q)]);
                }
                out.eigs.push_back(cl.value);
                out.sizes.push_back(m);
                col += m;
            }
        }
    }
    if (col != p)
        throw std::runtime_error("jordanize: Jordan chains do not span the block");
    return out;
}

} // namespace

bool JordanizationResult::diagonal() const {
    for (int i = 0; i + 1 < J.rows(); ++i)
        if (std::abs(J(i, i + 1)) != 0.0) return false;
    return true;
}

std::vector<Complex> JordanizationResult::eigenvalues_flat() const {
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(J.rows()));
    for (int i = 0; i < J.rows(); ++i) out.push_back(J(i, i));
    return out;
}

JordanizationResult jordanize_diag_blocks(const Matrix& A, const BlockPartition& part,
                                          const JordanizationOptions& opt) {
    if (A.rows() != part.n() || A.cols() != part.n())
        throw std::invalid_argument("jordanize_diag_blocks: matrix does not match partition");
    if (!is_finite(A))
        throw std::invalid_argument("jordanize_diag_blocks: non-finite entries");

    JordanizationResult out{part, Matrix::Zero(part.n(), part.n()), Matrix::Zero(part.n(), part.n()), {}, {}};

    double cond_max = 0.0;
    for (int k = 0; k < part.s(); ++k) {
        Matrix B = get_block(A, part, k, k);
        double ctol = opt.cluster_tol > 0 ? opt.cluster_tol : 1e-8 * std::max(1.0, max_abs(B));
        double rtol = opt.rank_tol > 0 ? opt.rank_tol : std::max(ctol, 1e-10);
        BlockJordan bj = jordanize_block(B, ctol, rtol);
        set_block(out.T, part, k, k, bj.T);
        set_block(out.J, part, k, k, bj.J);
        out.block_eigenvalues.push_back(bj.eigs);
        out.jordan_block_sizes.push_back(bj.sizes);

        Eigen::JacobiSVD<Matrix> svd(bj.T);
        double smin = svd.singularValues()(svd.singularValues().size() - 1);
        double smax = svd.singularValues()(0);
        cond_max = std::max(cond_max, smin > 0 ? smax / smin : std::numeric_limits<double>::infinity());
    }

    Matrix AD = block_diagonal_part(A, part);
    Matrix R = out.T.partialPivLu().solve(AD * out.T) - out.J;
    double den = std::max(1.0, max_abs(AD));
    out.reconstruction_residual = max_abs(R) / den;
    if (cond_max > opt.jordan_cond_max) {
        out.degraded_accuracy = true;
        out.warning = "eigenvector basis condition number above jordan_cond_max";
    }
    return out;
}

JordanizationResult jordanize(const Matrix& A, const JordanizationOptions& opt) {
    return jordanize_diag_blocks(A, BlockPartition({static_cast<int>(A.rows())}), opt);
}

JordanizationResult jordanization_from_given(const Matrix& A, const BlockPartition& part,
                                             const Matrix& T, const Matrix& J, double tol) {
    JordanizationResult out{part, T, J, {}, {}};
    for (int k = 0; k < part.s(); ++k) {
        std::vector<Complex> eigs;
        std::vector<int> sizes;
        int p = part.size(k), off = part.offset(k);
        int i = 0;
        while (i < p) {
            int len = 1;
            while (i + len < p && std::abs(J(off + i + len - 1, off + i + len)) > 0.5) ++len;
            eigs.push_back(J(off + i, off + i));
            sizes.push_back(len);
            i += len;
        }
        out.block_eigenvalues.push_back(eigs);
        out.jordan_block_sizes.push_back(sizes);
    }
    Matrix AD = block_diagonal_part(A, part);
    Matrix R = T.partialPivLu().solve(AD * T) - J;
    out.reconstruction_residual = max_abs(R) / std::max(1.0, max_abs(AD));
    if (out.reconstruction_residual > tol)
        throw std::invalid_argument("jordanization_from_given: supplied (T, J) do not reduce the diagonal blocks");
    return out;
}

ResonanceReport detect_resonances(const JordanizationResult& jr, double int_tol) {
    ResonanceReport rep;
    // partial resonances, per diagonal block
    for (int k = 0; k < jr.partition.s(); ++k) {
        const auto& eigs = jr.block_eigenvalues[static_cast<std::size_t>(k)];
        for (std::size_t i = 0; i < eigs.size(); ++i) {
            for (std::size_t j = 0; j < eigs.size(); ++j) {
                if (i == j) continue;
                Complex d = eigs[i] - eigs[j];
                long ell = std::lround(d.real());
                if (ell != 0 && std::abs(d - Complex(double(ell), 0.0)) <= int_tol)
                    rep.partial.push_back({k, static_cast<int>(i), static_cast<int>(j), ell});
            }
        }
    }
    // global z=0 resonances over the whole spectrum
    auto mu = jr.eigenvalues_flat();
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < mu.size(); ++j) {
            if (i == j) continue;
            Complex d = mu[i] - mu[j];
            long ell = std::lround(d.real());
            if (ell != 0 && std::abs(d - Complex(double(ell), 0.0)) <= int_tol)
                rep.global.push_back({-1, static_cast<int>(i), static_cast<int>(j), ell});
        }
    }
    return rep;
}

} // namespace isomono
