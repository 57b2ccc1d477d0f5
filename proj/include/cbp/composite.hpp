#pragma once

#include "cbp/bernstein.hpp"

#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cbp {

/// Strictly increasing breakpoints s_0 < s_1 < ... < s_K, K >= 1.
class KnotSequence {
public:
    explicit KnotSequence(std::vector<double> knots);
    static KnotSequence equidistant(double s0, double sf, int segments);

    [[nodiscard]] int segments() const noexcept { return static_cast<int>(knots_.size()) - 1; }
    [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
    [[nodiscard]] double operator[](int i) const { return knots_[i]; }
    [[nodiscard]] double front() const noexcept { return knots_.front(); }
    [[nodiscard]] double back() const noexcept { return knots_.back(); }
    [[nodiscard]] Interval segment(int i) const { return {knots_[i], knots_[i + 1]}; }
    [[nodiscard]] double width(int i) const { return knots_[i + 1] - knots_[i]; }
    [[nodiscard]] Interval domain() const { return {front(), back()}; }

    /// Segment index containing s; interior knots belong to the right segment.
    [[nodiscard]] int locate(double s) const;

    bool operator==(const KnotSequence&) const = default;

private:
    std::vector<double> knots_;
};

/// Piecewise Bernstein polynomial of uniform degree over a knot sequence.
class CompositeBernstein {
public:
    CompositeBernstein(KnotSequence knots, int degree, std::vector<double> flat_cps);
    CompositeBernstein(KnotSequence knots, std::vector<std::vector<double>> segments);

    [[nodiscard]] const KnotSequence& knots() const noexcept { return knots_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] int segments() const noexcept { return knots_.segments(); }
    [[nodiscard]] int cps_per_segment() const noexcept { return degree_ + 1; }

    /// Flattened CPs [segment 0, segment 1, ...], length K(n+1).
    [[nodiscard]] const std::vector<double>& flat() const noexcept { return cps_; }
    [[nodiscard]] std::span<const double> segment_cps(int i) const;
    [[nodiscard]] BernsteinPoly segment(int i) const;

    [[nodiscard]] double operator()(double s) const;

private:
    KnotSequence knots_;
    int degree_;
    std::vector<double> cps_;
};

/// Nodes s_{n,K}: n+1 equidistant nodes per segment; interior knots repeat.
struct CollocationGrid {
    int degree = 0;
    std::vector<double> nodes;
    std::vector<int> segment;  ///< segment index of each node
    std::vector<int> local;    ///< local CP index of each node
};

double eval_cbp(const CompositeBernstein& x, double s);

CompositeBernstein sample_to_cbp(const std::function<double(double)>& f, const KnotSequence& knots,
                                 int n);

/// Block-diagonal D_{n,K} of per-segment D_n matrices.
DenseMatrix block_diff_matrix(int n, const KnotSequence& knots);

CollocationGrid collocation_grid(int n, const KnotSequence& knots);

enum class CbpOp { add, sub, mul };
CompositeBernstein cbp_arithmetic(const CompositeBernstein& a, const CompositeBernstein& b, CbpOp op);

/// Per-segment degree elevation / differentiation / scaling helpers.
CompositeBernstein elevate(const CompositeBernstein& x, int ne);
CompositeBernstein derivative(const CompositeBernstein& x);
CompositeBernstein scale(const CompositeBernstein& x, double factor);
CompositeBernstein add_constant(const CompositeBernstein& x, double c);

/// Max |X(s) - ref(s)| over `samples` equidistant points with every knot added.
double max_abs_error(const CompositeBernstein& x, const std::function<double(double)>& ref,
                     int samples);

/// Equidistant samples on the domain, knots included, sorted.
std::vector<double> sample_points(const KnotSequence& knots, int samples);

/// {"knots": [...], "degree": n, "segments": [[...], ...]} in that order.
nlohmann::ordered_json to_json(const CompositeBernstein& x);
CompositeBernstein cbp_from_json(const nlohmann::ordered_json& j);

}  // namespace cbp
