#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cbp {

using Vector = std::vector<double>;

/// Row-major dense matrix. Control-point vectors are treated as row vectors,
/// so the natural product is x * A (see row_times).
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

    static DenseMatrix identity(std::size_t n);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const double> row(std::size_t i) const noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<double> row(std::size_t i) noexcept {
        return {data_.data() + i * cols_, cols_};
    }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] DenseMatrix transpose() const;

    /// Copies `block` into this matrix with its (0,0) entry at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const DenseMatrix& block);

    [[nodiscard]] bool operator==(const DenseMatrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// Row-vector product x * A; requires x.size() == A.rows().
Vector row_times(std::span<const double> x, const DenseMatrix& a);

/// Column-vector product A * x; requires x.size() == A.cols().
Vector times_col(const DenseMatrix& a, std::span<const double> x);

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);
double inf_norm(std::span<const double> v);

/// CSV with 17 significant digits, row-major, LF line endings.
std::string to_csv(const DenseMatrix& a);

}  // namespace cbp
