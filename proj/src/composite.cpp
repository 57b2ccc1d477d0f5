#include "cbp/composite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbp {

KnotSequence::KnotSequence(std::vector<double> knots) : knots_(std::move(knots)) {
    if (knots_.size() < 2) throw std::invalid_argument("KnotSequence: needs at least two knots");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!std::isfinite(knots_[i])) throw std::invalid_argument("KnotSequence: non-finite knot");
        if (i > 0 && !(knots_[i] > knots_[i - 1]))
            throw std::invalid_argument("KnotSequence: knots must be strictly increasing");
    }
}

KnotSequence KnotSequence::equidistant(double s0, double sf, int segments) {
    if (segments < 1) throw std::invalid_argument("KnotSequence::equidistant: segments < 1");
    std::vector<double> k(segments + 1);
    for (int i = 0; i <= segments; ++i) k[i] = s0 + (sf - s0) * i / segments;
    k.back() = sf;
    return KnotSequence(std::move(k));
}

int KnotSequence::locate(double s) const {
    if (!domain().contains(s))
        throw std::domain_error("KnotSequence: s = " + std::to_string(s) + " outside domain");
    auto it = std::upper_bound(knots_.begin(), knots_.end(), s);
    int i = static_cast<int>(it - knots_.begin()) - 1;
    return std::clamp(i, 0, segments() - 1);
}

CompositeBernstein::CompositeBernstein(KnotSequence knots, int degree, std::vector<double> flat_cps)
    : knots_(std::move(knots)), degree_(degree), cps_(std::move(flat_cps)) {
    if (degree_ < 0 || degree_ > kMaxDegree)
        throw std::invalid_argument("CompositeBernstein: degree out of range");
    if (cps_.size() != static_cast<std::size_t>(knots_.segments() * (degree_ + 1)))
        throw std::invalid_argument("CompositeBernstein: expected K(n+1) control points");
    for (double c : cps_)
        if (!std::isfinite(c)) throw std::invalid_argument("CompositeBernstein: non-finite control point");
}

namespace {

int segment_degree(const std::vector<std::vector<double>>& segs) {
    if (segs.empty()) throw std::invalid_argument("CompositeBernstein: no segments");
    return static_cast<int>(segs.front().size()) - 1;
}

std::vector<double> flatten(const std::vector<std::vector<double>>& segs) {
    std::vector<double> out;
    for (const auto& s : segs) {
        if (s.size() != segs.front().size())
            throw std::invalid_argument("CompositeBernstein: mixed segment degrees");
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

}  // namespace

CompositeBernstein::CompositeBernstein(KnotSequence knots, std::vector<std::vector<double>> segments)
    : CompositeBernstein(std::move(knots), segment_degree(segments), flatten(segments)) {}

std::span<const double> CompositeBernstein::segment_cps(int i) const {
    if (i < 0 || i >= segments()) throw std::out_of_range("CompositeBernstein: segment index");
    return std::span<const double>(cps_).subspan(static_cast<std::size_t>(i) * (degree_ + 1), degree_ + 1);
}

BernsteinPoly CompositeBernstein::segment(int i) const {
    auto c = segment_cps(i);
    return {std::vector<double>(c.begin(), c.end()), knots_.segment(i)};
}

double CompositeBernstein::operator()(double s) const {
    const int i = knots_.locate(s);
    return de_casteljau(segment_cps(i), knots_.segment(i).parameter(s));
}

double eval_cbp(const CompositeBernstein& x, double s) { return x(s); }

CompositeBernstein sample_to_cbp(const std::function<double(double)>& f, const KnotSequence& knots,
                                 int n) {
    if (n < 0) throw std::invalid_argument("sample_to_cbp: negative degree");
    const int nodes_per_seg = n + 1;
    std::vector<double> cps;
    cps.reserve(static_cast<std::size_t>(knots.segments()) * nodes_per_seg);
    for (int i = 0; i < knots.segments(); ++i) {
        for (int j = 0; j <= n; ++j) {
            const double s = n == 0 ? knots[i] : knots[i] + j * knots.width(i) / n;
            const double v = f(j == n && n > 0 ? knots[i + 1] : s);
            if (!std::isfinite(v))
                throw std::domain_error("sample_to_cbp: non-finite sample at s = " + std::to_string(s));
            cps.push_back(v);
        }
    }
    return {knots, n, std::move(cps)};
}

DenseMatrix block_diff_matrix(int n, const KnotSequence& knots) {
    if (n < 1) throw std::invalid_argument("block_diff_matrix: degree must be >= 1");
    const int K = knots.segments();
    DenseMatrix d(K * (n + 1), K * (n + 1));
    for (int i = 0; i < K; ++i) d.set_block(i * (n + 1), i * (n + 1), diff_matrix_D(n, knots.segment(i)));
    return d;
}

CollocationGrid collocation_grid(int n, const KnotSequence& knots) {
    if (n < 1) throw std::invalid_argument("collocation_grid: degree must be >= 1");
    CollocationGrid g;
    g.degree = n;
    for (int i = 0; i < knots.segments(); ++i) {
        for (int j = 0; j <= n; ++j) {
            g.nodes.push_back(j == n ? knots[i + 1] : knots[i] + j * knots.width(i) / n);
            g.segment.push_back(i);
            g.local.push_back(j);
        }
    }
    return g;
}

namespace {

template <typename SegmentOp>
CompositeBernstein map_segments(const CompositeBernstein& x, SegmentOp op) {
    std::vector<std::vector<double>> segs;
    for (int i = 0; i < x.segments(); ++i) segs.push_back(op(x.segment(i)).control_points());
    return {x.knots(), std::move(segs)};
}

}  // namespace

CompositeBernstein cbp_arithmetic(const CompositeBernstein& a, const CompositeBernstein& b, CbpOp op) {
    if (!(a.knots() == b.knots()))
        throw std::invalid_argument("cbp_arithmetic: operands have different knot sequences");
    std::vector<std::vector<double>> segs;
    for (int i = 0; i < a.segments(); ++i) {
        const auto pa = a.segment(i);
        const auto pb = b.segment(i);
        switch (op) {
            case CbpOp::add: segs.push_back(add_cp(pa, pb).control_points()); break;
            case CbpOp::sub: segs.push_back(sub_cp(pa, pb).control_points()); break;
            case CbpOp::mul: segs.push_back(multiply_cp(pa, pb).control_points()); break;
        }
    }
    return {a.knots(), std::move(segs)};
}

CompositeBernstein elevate(const CompositeBernstein& x, int ne) {
    return map_segments(x, [ne](const BernsteinPoly& p) { return elevate(p, ne); });
}

CompositeBernstein derivative(const CompositeBernstein& x) {
    return map_segments(x, [](const BernsteinPoly& p) { return derivative(p); });
}

CompositeBernstein scale(const CompositeBernstein& x, double factor) {
    auto cps = x.flat();
    for (double& c : cps) c *= factor;
    return {x.knots(), x.degree(), std::move(cps)};
}

CompositeBernstein add_constant(const CompositeBernstein& x, double c) {
    auto cps = x.flat();
    for (double& v : cps) v += c;
    return {x.knots(), x.degree(), std::move(cps)};
}

std::vector<double> sample_points(const KnotSequence& knots, int samples) {
    if (samples < 2) throw std::invalid_argument("sample_points: need at least two samples");
    std::vector<double> pts(knots.knots());
    const double a = knots.front();
    const double b = knots.back();
    for (int k = 0; k < samples; ++k) pts.push_back(k == samples - 1 ? b : a + (b - a) * k / (samples - 1));
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

double max_abs_error(const CompositeBernstein& x, const std::function<double(double)>& ref,
                     int samples) {
    double err = 0.0;
    for (double s : sample_points(x.knots(), samples)) err = std::max(err, std::abs(x(s) - ref(s)));
    return err;
}

nlohmann::ordered_json to_json(const CompositeBernstein& x) {
    nlohmann::ordered_json j;
    j["knots"] = x.knots().knots();
    j["degree"] = x.degree();
    auto segs = nlohmann::ordered_json::array();
    for (int i = 0; i < x.segments(); ++i) {
        auto c = x.segment_cps(i);
        segs.push_back(std::vector<double>(c.begin(), c.end()));
    }
    j["segments"] = std::move(segs);
    return j;
}

CompositeBernstein cbp_from_json(const nlohmann::ordered_json& j) {
    KnotSequence knots(j.at("knots").get<std::vector<double>>());
    auto segs = j.at("segments").get<std::vector<std::vector<double>>>();
    CompositeBernstein x(std::move(knots), std::move(segs));
    if (x.degree() != j.at("degree").get<int>())
        throw std::invalid_argument("cbp_from_json: degree field disagrees with segment length");
    return x;
}

}  // namespace cbp
