#include "cbp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace cbp {

LuDecomposition::LuDecomposition(DenseMatrix a) : lu_(std::move(a)), perm_(lu_.rows()) {
    if (lu_.rows() != lu_.cols()) throw std::invalid_argument("LuDecomposition: matrix must be square");
    const std::size_t n = lu_.rows();
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});

    double scale = 0.0;
    for (double v : lu_.data()) scale = std::max(scale, std::abs(v));
    const double tiny = std::numeric_limits<double>::epsilon() * n * std::max(scale, 1e-300);

    double umax = 0.0;
    double umin = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(lu_(i, k)) > best) {
                best = std::abs(lu_(i, k));
                p = i;
            }
        }
        umax = std::max(umax, best);
        umin = std::min(umin, best);
        if (!(best > tiny)) {
            singular_ = true;
            continue;
        }
        if (p != k) {
            std::swap(perm_[p], perm_[k]);
            auto rp = lu_.row(p);
            auto rk = lu_.row(k);
            std::swap_ranges(rp.begin(), rp.end(), rk.begin());
        }
        const double pivot = lu_(k, k);
        auto rk = lu_.row(k);
        for (std::size_t i = k + 1; i < n; ++i) {
            auto ri = lu_.row(i);
            const double f = ri[k] / pivot;
            ri[k] = f;
            if (f == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) ri[j] -= f * rk[j];
        }
    }
    cond_ = singular_ || n == 0 ? std::numeric_limits<double>::infinity() : umax / umin;
}

Vector LuDecomposition::solve(std::span<const double> b) const {
    if (singular_) throw std::runtime_error("LuDecomposition::solve: singular matrix");
    const std::size_t n = lu_.rows();
    if (b.size() != n) throw std::invalid_argument("LuDecomposition::solve: size mismatch");
    Vector x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[perm_[i]];
    for (std::size_t i = 0; i < n; ++i) {
        auto ri = lu_.row(i);
        for (std::size_t j = 0; j < i; ++j) x[i] -= ri[j] * x[j];
    }
    for (std::size_t i = n; i-- > 0;) {
        auto ri = lu_.row(i);
        for (std::size_t j = i + 1; j < n; ++j) x[i] -= ri[j] * x[j];
        x[i] /= ri[i];
    }
    return x;
}

int matrix_rank(DenseMatrix a, double rel_tol) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0;
    const double tol = rel_tol * scale;
    int rank = 0;
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < m; ++col) {
        std::size_t p = row;
        for (std::size_t i = row + 1; i < m; ++i)
            if (std::abs(a(i, col)) > std::abs(a(p, col))) p = i;
        if (std::abs(a(p, col)) <= tol) continue;
        if (p != row) {
            auto rp = a.row(p);
            auto rr = a.row(row);
            std::swap_ranges(rp.begin(), rp.end(), rr.begin());
        }
        for (std::size_t i = row + 1; i < m; ++i) {
            const double f = a(i, col) / a(row, col);
            for (std::size_t j = col; j < n; ++j) a(i, j) -= f * a(row, j);
        }
        ++row;
        ++rank;
    }
    return rank;
}

}  // namespace cbp
