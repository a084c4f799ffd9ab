#pragma once

#include "qspec/mclaughlin.hpp"

#include <limits>
#include <memory>
#include <random>

namespace qspec {

/// What the weights module needs from a Weyl-Yurko matrix. The problem-backed
/// source is the normal one; StubWeyl injects a synthetic M for the cases no
/// known problem exhibits.
class WeylSource {
public:
    virtual ~WeylSource() = default;
    /// M(lambda); may throw PoleError.
    virtual Mat4 m(cplx lambda) const = 0;
    /// |Delta_kk(lambda)| over its reference scale.
    virtual double delta_rel(int k, cplx lambda) const = 0;
    /// m_43 at lambda, taking the removable limit -dDelta_43/dDelta_33 when both
    /// vanish; +inf at a genuine pole.
    virtual cplx m43_value(cplx lambda) const = 0;
    /// Zeros of Delta_11, Delta_22, Delta_33 inside the square of half-width h around lambda0.
    virtual std::vector<cplx> nearby_poles(cplx /*lambda0*/, double /*h*/) const { return {}; }
};

class ProblemWeyl : public WeylSource {
public:
    explicit ProblemWeyl(const Problem& pr) : pr_(pr) {}

    Mat4 m(cplx lambda) const override { return weyl_from_deltas(characteristic_all(pr_, lambda, false)); }

    double delta_rel(int k, cplx lambda) const override {
        auto v = characteristic_delta(pr_, lambda, k, k, false);
        return std::abs(v.value) / v.scale;
    }

    cplx m43_value(cplx lambda) const override {
        auto d33 = characteristic_delta(pr_, lambda, 3, 3, true);
        auto d43 = characteristic_delta(pr_, lambda, 4, 3, true);
        if (std::abs(d33.value) >= kPoleFloor * d33.scale) return -d43.value / d33.value;
        if (std::abs(d43.value) < kPoleFloor * d43.scale) return -d43.dvalue / d33.dvalue;
        return {std::numeric_limits<double>::infinity(), 0.0};
    }

    std::vector<cplx> nearby_poles(cplx lambda0, double h) const override {
        std::vector<cplx> out;
        for (int k = 1; k <= 3; ++k) {
            // Off-centre box: lambda0 itself is a zero and must not sit on a bisection line.
            auto zs = find_complex_zeros_fn(delta_function(pr_, k, k), lambda0 - cplx(1.0137 * h, 0.9871 * h),
                                            lambda0 + cplx(0.9923 * h, 1.0061 * h), 1000, pr_.tol().root_tol);
            for (auto& z : zs) out.push_back(z.lambda);
        }
        return out;
    }

    const Problem& problem() const { return pr_; }

private:
    const Problem& pr_;
};

/// M(lambda) = A + B / (lambda - lambda0) with B = A N. Laurent data are then
/// exactly M<0> = A, M<-1> = B and N(lambda0) = N.
class StubWeyl : public WeylSource {
public:
    StubWeyl(cplx lambda0, Mat4 a, Mat4 n, double d33_rel, cplx m43_at_pole)
        : l0_(lambda0), a_(std::move(a)), b_(a_ * n), d33_rel_(d33_rel), m43_at_(m43_at_pole) {}

    Mat4 m(cplx lambda) const override { return a_ + b_ / (lambda - l0_); }
    double delta_rel(int k, cplx lambda) const override {
        if (k == 3 && std::abs(lambda - l0_) < 1e-12) return d33_rel_;
        return 1.0;
    }
    cplx m43_value(cplx lambda) const override {
        if (std::abs(lambda - l0_) < 1e-12) return m43_at_;
        return m(lambda)(3, 2);
    }

private:
    cplx l0_;
    Mat4 a_, b_;
    double d33_rel_;
    cplx m43_at_;
};

struct WeightMatrix {
    cplx lambda0 = 0.0;
    Mat4 m_minus1 = Mat4::Zero();
    Mat4 m_zero = Mat4::Identity();
    Mat4 n = Mat4::Zero();
    double contour_radius = 0.0;
    int quadrature_nodes = 0;
    double doubling_change = 0.0;
};

struct LaurentOptions {
    double radius = 0.0; // 0: chosen from nearby poles
    int nodes = 64;
    double doubling_tol = 1e-8;
};

/// 1/4 of the distance to the nearest other pole, capped at 1 + |lambda0|/100.
inline double choose_radius(const WeylSource& src, cplx lambda0) {
    const double cap = 1.0 + std::abs(lambda0) / 100.0;
    const double h = 4.0 * cap;
    double dist = h;
    for (cplx z : src.nearby_poles(lambda0, h)) {
        const double d = std::abs(z - lambda0);
        if (d > 1e-6 * (1.0 + std::abs(lambda0))) dist = std::min(dist, d);
    }
    return std::min(cap, 0.25 * dist);
}

inline LaurentResult laurent_coefficients(const WeylSource& src, cplx lambda0, const std::vector<int>& orders,
                                          const LaurentOptions& opt = {}) {
    const double r = opt.radius > 0 ? opt.radius : choose_radius(src, lambda0);
    LaurentResult res;
    try {
        res = laurent_trapezoid([&](cplx l) { return src.m(l); }, lambda0, r, orders, opt.nodes);
    } catch (const PoleError& e) {
        throw Error("contour", std::string("contour passes through a pole (") + e.what() + ")");
    }
    if (!(res.doubling_change < opt.doubling_tol))
        throw Error("contour", "Laurent coefficients did not converge under node doubling (change " +
                                   std::to_string(res.doubling_change) + ")");
    return res;
}

inline WeightMatrix weight_matrix(const WeylSource& src, cplx lambda0, const LaurentOptions& opt = {}) {
    auto lc = laurent_coefficients(src, lambda0, {-1, 0}, opt);
    WeightMatrix w;
    w.lambda0 = lambda0;
    w.m_minus1 = lc.coeff_doubled.at(-1);
    w.m_zero = lc.coeff_doubled.at(0);
    // Diagonal and upper part of M are constant; quadrature of them is pure roundoff.
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            w.m_minus1(i, j) = 0.0;
            w.m_zero(i, j) = i == j ? 1.0 : 0.0;
        }
    w.n = w.m_zero.triangularView<Eigen::UnitLower>().solve(w.m_minus1);
    w.contour_radius = lc.radius;
    w.quadrature_nodes = opt.nodes;
    w.doubling_change = lc.doubling_change;
    const double big = std::max(max_abs(w.n), 1e-300);
    double upper = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) upper = std::max(upper, std::abs(w.n(i, j)));
    // At a regular point n is pure quadrature noise and has no structure to check.
    const bool has_pole = big > 1e-9 * (1.0 + max_abs(w.m_zero));
    if (has_pole && upper > 1e-7 * big) throw Error("structure", "weight matrix is not strictly lower-triangular");
    if (has_pole && (std::abs(w.n(1, 0) - w.n(3, 2)) > 1e-7 * big || std::abs(w.n(2, 0) + w.n(3, 1)) > 1e-7 * big))
        throw Error("structure", "inconsistent structure: n21 != n43 or n31 != -n42");
    return w;
}

struct ClassifyOptions {
    double gamma_floor = 1e-6;
    double pole_floor = 1e-8;   // on |Delta_33| / scale
    double match_tol = 1e-6;    // m43 = xi/gamma, relative
};

/// gamma = 0 splits III from IV on whether Delta_33 vanishes; otherwise I when
/// m43 equals xi/gamma, else II. |gamma| within [0.1, 10] x floor is "indeterminate".
inline CaseTag classify_eigenvalue(const SpectralPoint& p, const WeylSource& src, const ClassifyOptions& o = {}) {
    if (!p.norm_ok) return CaseTag::unknown;
    const double g = std::abs(p.gamma);
    if (g >= 0.1 * o.gamma_floor && g <= 10.0 * o.gamma_floor) return CaseTag::indeterminate;
    if (g < 0.1 * o.gamma_floor) {
        const bool pole = src.delta_rel(3, p.lambda) < o.pole_floor;
        return pole ? CaseTag::III : CaseTag::IV;
    }
    const cplx m43 = src.m43_value(p.lambda);
    const cplx ratio = p.xi / p.gamma;
    if (finite(m43) && std::abs(m43 - ratio) <= o.match_tol * (1.0 + std::abs(ratio))) return CaseTag::I;
    return CaseTag::II;
}

struct StructureCheck {
    std::string name;
    double residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

struct StructureReport {
    CaseTag case_tag = CaseTag::unknown;
    std::vector<StructureCheck> checks;
    bool all_pass() const {
        for (auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline std::vector<std::pair<int, int>> case_pattern(CaseTag t) {
    switch (t) {
    case CaseTag::I: return {{3, 2}};
    case CaseTag::II: return {{3, 1}, {3, 2}, {4, 1}, {4, 2}};
    case CaseTag::III: return {{2, 1}, {4, 3}, {4, 1}};
    case CaseTag::IV: return {{4, 1}};
    case CaseTag::V: return {{2, 1}, {4, 3}};
    default: return {};
    }
}

} // namespace detail

/// Residuals of the case structure of N. Never throws.
inline StructureReport verify_weight_structure(const WeightMatrix& w, const SpectralPoint& p, CaseTag tag) {
    StructureReport rep;
    rep.case_tag = tag;
    const Mat4& n = w.n;
    const double big = std::max(max_abs(n), 1e-300);
    auto add = [&](std::string name, double r, double thr) { rep.checks.push_back({std::move(name), r, thr, r < thr}); };
    auto e = [&](int j, int k) { return n(j - 1, k - 1); };

    add("n21 = n43", std::abs(e(2, 1) - e(4, 3)) / big, 1e-7);
    add("n31 = -n42", std::abs(e(3, 1) + e(4, 2)) / big, 1e-7);
    double upper = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) upper = std::max(upper, std::abs(n(i, j)));
    add("strictly lower", upper / big, 1e-7);

    auto pattern = detail::case_pattern(tag);
    if (!pattern.empty()) {
        double off = 0.0;
        for (int j = 2; j <= 4; ++j)
            for (int k = 1; k < j; ++k) {
                bool in = false;
                for (auto [pj, pk] : pattern) in = in || (pj == j && pk == k);
                if (!in) off = std::max(off, std::abs(e(j, k)));
            }
        add("off-pattern entries", off / big, 1e-7);
    }
    const cplx g2 = p.gamma * p.gamma, x2 = p.xi * p.xi;
    switch (tag) {
    case CaseTag::I:
        add("n32 = -gamma^2", std::abs(e(3, 2) + g2) / (1.0 + std::abs(g2)), 1e-6);
        break;
    case CaseTag::II:
        add("n31 n42 - n41 n32 = 0", std::abs(e(3, 1) * e(4, 2) - e(4, 1) * e(3, 2)) / (big * big), 1e-7);
        add("n31 n32 n41 n42 != 0",
            std::min({std::abs(e(3, 1)), std::abs(e(3, 2)), std::abs(e(4, 1)), std::abs(e(4, 2))}) > 1e-7 * big ? 0.0 : 1.0,
            0.5);
        break;
    case CaseTag::III:
        add("n21 = m43<-1>", std::abs(e(2, 1) - w.m_minus1(3, 2)) / big, 1e-7);
        add("n41 = xi^2", std::abs(e(4, 1) - x2) / (1.0 + std::abs(x2)), 1e-6);
        break;
    case CaseTag::IV:
        add("n41 = xi^2", std::abs(e(4, 1) - x2) / (1.0 + std::abs(x2)), 1e-6);
        break;
    case CaseTag::V:
        add("n21 = m43<-1>", std::abs(e(2, 1) - w.m_minus1(3, 2)) / big, 1e-7);
        add("n21 != 0", std::abs(e(2, 1)) > 1e-12 ? 0.0 : 1.0, 0.5);
        break;
    default:
        break;
    }
    return rep;
}

inline StructureReport verify_weight_structure(const WeightMatrix& w, const SpectralPoint& p) {
    return verify_weight_structure(w, p, p.case_tag);
}

/// Random perturbations of the beam (constant-plus-bump q, small a, b, c),
/// classifying the first few eigenvalues of each. Collects anything that is
/// not case I. Finding nothing is an expected outcome.
struct SearchHit {
    ProblemSpec spec;
    SpectralPoint point;
};

inline std::vector<SearchHit> search_cases_2_to_4(int trials, int eigen_count, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<SearchHit> hits;
    for (int t = 0; t < trials; ++t) {
        ProblemSpec s;
        s.self_adjoint_hint = true;
        const double x0 = 0.1 + 0.4 * (u(rng) + 1.0) / 2.0;
        s.q.segments = {{0.0, x0, {0.0}}, {x0, x0 + 0.3, {5.0 * u(rng)}}, {x0 + 0.3, 1.0, {0.0}}};
        s.boundary = {u(rng), u(rng), u(rng)};
        Problem pr = validate_problem(s);
        ProblemWeyl src(pr);
        try {
            auto pts = weight_numbers(pr, first_zeros(pr, 2, 2, eigen_count, -200.0),
                                      WeightNumberOptions{false, 64, 0.0, 1e-6});
            for (auto& p : pts) {
                p.case_tag = classify_eigenvalue(p, src);
                if (p.case_tag != CaseTag::I) hits.push_back({s, p});
            }
        } catch (const Error&) {
            continue;
        }
    }
    return hits;
}

} // namespace qspec
