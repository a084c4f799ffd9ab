#pragma once

#include "qspec/types.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace qspec {

/// One polynomial piece on [x0, x1]. coeffs[k] multiplies (x - x0)^k.
struct Segment {
    double x0 = 0.0;
    double x1 = 1.0;
    std::vector<cplx> coeffs;
};

/// Piecewise polynomial coefficient p(x) or q(x) on [0,1].
struct CoefficientField {
    std::vector<Segment> segments;
    bool declared_real = false;

    static CoefficientField zero() { return constant(0.0); }

    static CoefficientField constant(cplx v) {
        CoefficientField f;
        f.segments.push_back({0.0, 1.0, {v}});
        return f;
    }

    /// Uniform samples on [0,1] (x_i = i/(n-1); a single sample is a constant).
    /// interp 0 holds the left value on each cell, 1 is linear, 3 a natural cubic spline.
    static CoefficientField from_samples(const std::vector<cplx>& v, int interp);

    std::size_t segment_index(double x) const {
        auto it = std::upper_bound(segments.begin(), segments.end(), x,
                                   [](double xv, const Segment& s) { return xv < s.x1; });
        if (it == segments.end()) return segments.size() - 1;
        return static_cast<std::size_t>(it - segments.begin());
    }

    cplx eval_in(std::size_t seg, double x) const {
        const Segment& s = segments[seg];
        const double t = x - s.x0;
        cplx acc = 0.0;
        for (auto k = s.coeffs.size(); k-- > 0;) acc = acc * t + s.coeffs[k];
        return acc;
    }

    cplx operator()(double x) const { return eval_in(segment_index(x), x); }

    std::vector<double> breakpoints() const {
        std::vector<double> b;
        for (const auto& s : segments) b.push_back(s.x0);
        if (!segments.empty()) b.push_back(segments.back().x1);
        return b;
    }

    bool is_zero() const {
        for (const auto& s : segments)
            for (auto c : s.coeffs)
                if (c != cplx(0.0)) return false;
        return true;
    }
};

inline CoefficientField CoefficientField::from_samples(const std::vector<cplx>& v, int interp) {
    if (v.empty()) throw ValidationError("samples: empty value list");
    if (interp != 0 && interp != 1 && interp != 3)
        throw ValidationError("samples: interp must be 0, 1 or 3");
    CoefficientField f;
    const std::size_t n = v.size();
    if (n == 1) return constant(v[0]);
    const double h = 1.0 / static_cast<double>(n - 1);
    auto node = [&](std::size_t i) { return i + 1 == n ? 1.0 : static_cast<double>(i) * h; };

    if (interp == 0) {
        for (std::size_t i = 0; i + 1 < n; ++i) f.segments.push_back({node(i), node(i + 1), {v[i]}});
        return f;
    }
    if (interp == 1 || n == 2) {
        for (std::size_t i = 0; i + 1 < n; ++i)
            f.segments.push_back({node(i), node(i + 1), {v[i], (v[i + 1] - v[i]) / h}});
        return f;
    }

    // natural spline: second derivatives m_i with m_0 = m_{n-1} = 0
    std::vector<cplx> m(n, 0.0), rhs(n, 0.0);
    std::vector<double> diag(n, 4.0), cp(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = 6.0 * (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (h * h);
    // Thomas sweep on the interior (sub/super diagonal 1, diagonal 4)
    std::vector<cplx> d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double denom = diag[i] - (i > 1 ? cp[i - 1] : 0.0);
        cp[i] = 1.0 / denom;
        d[i] = (rhs[i] - (i > 1 ? d[i - 1] : cplx(0.0))) / denom;
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        m[i] = d[i] - cp[i] * m[i + 1];
        if (i == 1) break;
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        cplx a0 = v[i];
        cplx a1 = (v[i + 1] - v[i]) / h - h * (2.0 * m[i] + m[i + 1]) / 6.0;
        cplx a2 = m[i] / 2.0;
        cplx a3 = (m[i + 1] - m[i]) / (6.0 * h);
        f.segments.push_back({node(i), node(i + 1), {a0, a1, a2, a3}});
    }
    return f;
}

struct BoundaryParams {
    cplx a = 0.0, b = 0.0, c = 0.0;
};

struct Tolerances {
    double ode_rel = 1e-10;
    double ode_abs = 1e-12;
    double root_tol = 1e-12;
    int contour_nodes = 64;
};

struct ProblemSpec {
    CoefficientField p = CoefficientField::zero();
    CoefficientField q = CoefficientField::zero();
    BoundaryParams boundary;
    Tolerances tolerances;
    bool self_adjoint_hint = false;
};

/// A ProblemSpec that passed validate_problem. `nodes` is the merged, sorted
/// breakpoint set of p and q; the integrator never steps across one.
class Problem {
public:
    const ProblemSpec& spec() const { return spec_; }
    const CoefficientField& p() const { return spec_.p; }
    const CoefficientField& q() const { return spec_.q; }
    cplx a() const { return spec_.boundary.a; }
    cplx b() const { return spec_.boundary.b; }
    cplx c() const { return spec_.boundary.c; }
    const Tolerances& tol() const { return spec_.tolerances; }
    const std::vector<double>& nodes() const { return nodes_; }

    /// True when every coefficient and boundary constant is real, so
    /// Delta_jk is real on the real axis.
    bool is_real() const { return real_; }

private:
    friend Problem validate_problem(ProblemSpec raw);
    ProblemSpec spec_;
    std::vector<double> nodes_;
    bool real_ = false;
};

namespace detail {

inline void check_field(CoefficientField& f, const char* name) {
    auto fail = [&](const std::string& m) { throw ValidationError(std::string(name) + ": " + m); };
    if (f.segments.empty()) fail("no segments");
    std::sort(f.segments.begin(), f.segments.end(),
              [](const Segment& l, const Segment& r) { return l.x0 < r.x0; });
    constexpr double eps = 1e-14;
    for (std::size_t i = 0; i < f.segments.size(); ++i) {
        const auto& s = f.segments[i];
        if (!std::isfinite(s.x0) || !std::isfinite(s.x1)) fail("non-finite breakpoint");
        if (!(s.x1 > s.x0)) fail("empty or reversed segment");
        if (s.coeffs.empty()) fail("segment without coefficients");
        for (auto c : s.coeffs)
            if (!finite(c)) fail("non-finite coefficient");
        if (i > 0) {
            double prev = f.segments[i - 1].x1;
            if (s.x0 < prev - eps) fail("overlapping segments");
            if (s.x0 > prev + eps) fail("gap between segments");
            f.segments[i].x0 = prev;
        }
    }
    if (std::abs(f.segments.front().x0) > eps || std::abs(f.segments.back().x1 - 1.0) > eps)
        fail("segments must cover exactly [0,1]");
    f.segments.front().x0 = 0.0;
    f.segments.back().x1 = 1.0;
    if (f.declared_real)
        for (const auto& s : f.segments)
            for (auto c : s.coeffs)
                if (c.imag() != 0.0) fail("declared real but has imaginary part");
}

inline bool field_real(const CoefficientField& f) {
    for (const auto& s : f.segments)
        for (auto c : s.coeffs)
            if (c.imag() != 0.0) return false;
    return true;
}

} // namespace detail

inline Problem validate_problem(ProblemSpec raw) {
    detail::check_field(raw.p, "p");
    detail::check_field(raw.q, "q");
    for (cplx v : {raw.boundary.a, raw.boundary.b, raw.boundary.c})
        if (!finite(v)) throw ValidationError("non-finite boundary constant");
    const auto& t = raw.tolerances;
    if (!(t.ode_rel > 0) || !(t.ode_abs > 0) || !(t.root_tol > 0))
        throw ValidationError("non-positive tolerance");
    if (t.contour_nodes < 16 || (t.contour_nodes & (t.contour_nodes - 1)) != 0)
        throw ValidationError("contour_nodes must be a power of two >= 16");

    Problem out;
    auto bp = raw.p.breakpoints();
    auto bq = raw.q.breakpoints();
    bp.insert(bp.end(), bq.begin(), bq.end());
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    out.nodes_ = bp;
    out.real_ = detail::field_real(raw.p) && detail::field_real(raw.q) &&
                raw.boundary.a.imag() == 0.0 && raw.boundary.b.imag() == 0.0 &&
                raw.boundary.c.imag() == 0.0;
    out.spec_ = std::move(raw);
    return out;
}

/// Clamped-free beam: p = q = 0, a = b = c = 0.
inline Problem beam_problem(Tolerances tol = {}) {
    ProblemSpec s;
    s.tolerances = tol;
    s.self_adjoint_hint = true;
    return validate_problem(s);
}

/// State (y, y', y'', y^[3]) with y^[3] = y''' - p y'.
struct QuasiState {
    cplx y = 0.0, dy = 0.0, d2y = 0.0, qd3y = 0.0;

    Vec4 vec() const { return Vec4(y, dy, d2y, qd3y); }
    static QuasiState from(const Vec4& v) { return {v(0), v(1), v(2), v(3)}; }
};

enum class End { left, right };

inline Mat4 boundary_form_matrix_abc(cplx a, cplx b, cplx c) {
    Mat4 u;
    u << -b, a, 1, 0,
         c, b, 0, 1,
         1, 0, 0, 0,
         0, 1, 0, 0;
    return u;
}

/// Rows are U_1..U_4 (left) or V_1..V_4 (right) acting on a QuasiState.
inline Mat4 boundary_form_matrix(const Problem& pr, End end) {
    if (end == End::right) return Mat4::Identity();
    return boundary_form_matrix_abc(pr.a(), pr.b(), pr.c());
}

/// Closed-form inverse of U: column k is the initial state of C_k.
inline Mat4 boundary_form_inverse(cplx a, cplx b, cplx c) {
    Mat4 ui;
    ui << 0, 0, 1, 0,
          0, 0, 0, 1,
          1, 0, b, -a,
          0, 1, -c, -b;
    return ui;
}

inline cplx lagrange_bracket(const QuasiState& y, const QuasiState& z) {
    return y.qd3y * z.y - y.d2y * z.dy + y.dy * z.d2y - y.y * z.qd3y;
}

inline cplx lagrange_bracket(const Vec4& y, const Vec4& z) {
    return lagrange_bracket(QuasiState::from(y), QuasiState::from(z));
}

} // namespace qspec
