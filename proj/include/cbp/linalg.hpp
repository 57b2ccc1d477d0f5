#pragma once

#include "cbp/dense_matrix.hpp"

#include <span>
#include <vector>

namespace cbp {

/// LU factorization with partial pivoting, PA = LU.
class LuDecomposition {
public:
    explicit LuDecomposition(DenseMatrix a);

    [[nodiscard]] bool singular() const noexcept { return singular_; }
    /// max |U_ii| / min |U_ii|; infinite when singular.
    [[nodiscard]] double condition_estimate() const noexcept { return cond_; }

    /// Solves A x = b. Throws std::runtime_error when the factorization is singular.
    [[nodiscard]] Vector solve(std::span<const double> b) const;

private:
    DenseMatrix lu_;
    std::vector<std::size_t> perm_;
    bool singular_ = false;
    double cond_ = 1.0;
};

/// Numerical rank by Gaussian elimination with partial pivoting; pivots below
/// rel_tol * max|A| count as zero.
int matrix_rank(DenseMatrix a, double rel_tol = 1e-10);

}  // namespace cbp
