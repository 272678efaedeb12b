#ifndef ISOMONO_TYPES_HPP
#define ISOMONO_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace isomono {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Block partition (p_1,...,p_s) of dimension n = sum p_a. Fixes the stratum
// and every block index used throughout.
class BlockPartition {
public:
    explicit BlockPartition(std::vector<int> sizes) : sizes_(std::move(sizes)) {
        if (sizes_.empty())
            throw std::invalid_argument("BlockPartition: empty size list");
        offsets_.resize(sizes_.size() + 1, 0);
        for (std::size_t a = 0; a < sizes_.size(); ++a) {
            if (sizes_[a] < 1)
                throw std::invalid_argument("BlockPartition: block sizes must be >= 1");
            offsets_[a + 1] = offsets_[a] + sizes_[a];
        }
    }

    int s() const { return static_cast<int>(sizes_.size()); }
    int n() const { return offsets_.back(); }
    int size(int a) const { return sizes_.at(static_cast<std::size_t>(a)); }
    int offset(int a) const { return offsets_.at(static_cast<std::size_t>(a)); }
    const std::vector<int>& sizes() const { return sizes_; }

    // block index owning row/column i
    int block_of(int i) const {
        for (int a = 0; a < s(); ++a)
            if (i < offsets_[static_cast<std::size_t>(a) + 1]) return a;
        throw std::out_of_range("BlockPartition::block_of");
    }

    bool operator==(const BlockPartition& o) const { return sizes_ == o.sizes_; }

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
};

// Lambda = lambda_1 I_{p_1} + ... + lambda_s I_{p_s}, lambda_a pairwise distinct.
struct Lambda {
    std::vector<Complex> values;
    BlockPartition partition;

    Lambda(std::vector<Complex> vals, BlockPartition part)
        : values(std::move(vals)), partition(std::move(part)) {
        if (static_cast<int>(values.size()) != partition.s())
            throw std::invalid_argument("Lambda: need one eigenvalue per block");
    }

    double min_separation() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < values.size(); ++a)
            for (std::size_t b = a + 1; b < values.size(); ++b)
                m = std::min(m, std::abs(values[a] - values[b]));
        return values.size() > 1 ? m : std::numeric_limits<double>::infinity();
    }

    void check_stratum(double eig_sep_tol) const {
        if (min_separation() < eig_sep_tol)
            throw std::runtime_error("Lambda: eigenvalues closer than eig_sep_tol (left the stratum)");
    }

    Matrix matrix() const {
        Matrix L = Matrix::Zero(partition.n(), partition.n());
        for (int a = 0; a < partition.s(); ++a)
            for (int i = 0; i < partition.size(a); ++i)
                L(partition.offset(a) + i, partition.offset(a) + i) = values[static_cast<std::size_t>(a)];
        return L;
    }

    // E_{p_j} = dLambda/dlambda_j: identity on block j, zero elsewhere
    Matrix projector(int j) const {
        Matrix E = Matrix::Zero(partition.n(), partition.n());
        for (int i = 0; i < partition.size(j); ++i)
            E(partition.offset(j) + i, partition.offset(j) + i) = 1.0;
        return E;
    }
};

inline bool is_finite(const Matrix& M) {
    return M.allFinite();
}

inline double max_abs(const Matrix& M) {
    return M.size() == 0 ? 0.0 : M.cwiseAbs().maxCoeff();
}

} // namespace isomono

#endif
