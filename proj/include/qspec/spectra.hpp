#pragma once

#include "qspec/weyl.hpp"

#include <functional>
#include <numbers>

namespace qspec {

struct DeltaEval {
    cplx value = 0.0;
    cplx dvalue = 0.0;
    double scale = 1.0;
};

using DeltaFn = std::function<DeltaEval(cplx)>;

inline DeltaFn delta_function(const Problem& pr, int j, int k) {
    delta_slot(j, k);
    return [&pr, j, k](cplx lam) {
        auto v = characteristic_delta(pr, lam, j, k, true);
        return DeltaEval{v.value, v.dvalue, v.scale};
    };
}

struct Zero {
    cplx lambda = 0.0;
    int j = 2, k = 2;
    int multiplicity_estimate = 1;
    cplx ddelta = 0.0;
    double dscale = 1.0; // secant slope of |Delta| across a neighbourhood; simplicity reference
};

inline constexpr double kSimplicityFloor = 1e-6;

/// Strict: a zero whose |ddelta| equals the floor is not simple.
inline bool simplicity_check(const Zero& z, double floor = kSimplicityFloor) {
    return std::abs(z.ddelta) > floor * z.dscale;
}

struct SpectrumRequest {
    int j = 2, k = 2;
    double xmin = 0.0, xmax = 1000.0; // real interval
    cplx lo = {-1.0, -1.0}, hi = {1.0, 1.0}; // rectangle corners (complex search)
    int max_count = 1000;
    double refine_tol = 1e-12;
};

namespace detail {

// Neighbourhood width used for the secant slope behind Zero::dscale.
inline double local_width(cplx lam) { return std::max(0.05, 0.2 * std::pow(std::abs(lam), 0.75)); }

inline double secant_scale(const DeltaFn& f, cplx lam) {
    const double w = local_width(lam);
    const double a = std::abs(f(lam - w).value), b = std::abs(f(lam + w).value);
    return std::max(0.5 * (a + b) / w, 1e-300);
}

inline double to_s(double lam) { return lam >= 0 ? std::pow(lam, 0.25) : -std::pow(-lam, 0.25); }
inline double from_s(double s) { return s >= 0 ? s * s * s * s : -(s * s * s * s); }

// Safeguarded Newton inside a sign-change bracket [a,b] of a real function.
inline double refine_real(const DeltaFn& f, double a, double fa, double b, double fb, double tol) {
    double x = 0.5 * (a + b);
    for (int it = 0; it < 100; ++it) {
        auto v = f(x);
        const double fx = v.value.real();
        if (fx == 0.0) return x;
        if ((fx < 0) == (fa < 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        double step_x;
        const double d = v.dvalue.real();
        double xn = (d != 0.0 && std::isfinite(d)) ? x - fx / d : std::numeric_limits<double>::quiet_NaN();
        if (!(xn > std::min(a, b) && xn < std::max(a, b))) {
            // secant on the bracket, then bisection if that also escapes
            xn = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
            if (!(xn > std::min(a, b) && xn < std::max(a, b))) xn = 0.5 * (a + b);
        }
        step_x = std::abs(xn - x);
        x = xn;
        if (step_x <= tol * (1.0 + std::abs(x)) || std::abs(b - a) <= tol * (1.0 + std::abs(x))) return x;
    }
    throw SearchError("real refinement did not converge near lambda=" + std::to_string(x));
}

} // namespace detail

/// Zeros of a real-on-the-axis function in [xmin, xmax], scanning in
/// s = sign(lambda)|lambda|^{1/4} with step 0.05. Sorted ascending.
inline std::vector<Zero> find_real_zeros_fn(const DeltaFn& f, double xmin, double xmax, int max_count,
                                            double tol, bool check_real = true) {
    if (!(xmax > xmin)) throw SearchError("empty interval");
    if (max_count < 1) throw SearchError("max_count must be >= 1");
    const double s0 = detail::to_s(xmin), s1 = detail::to_s(xmax);
    const int n = std::max(2, static_cast<int>(std::ceil((s1 - s0) / 0.05)) + 1);
    std::vector<Zero> out;
    double xa = xmin;
    DeltaEval va = f(xa);
    auto check = [&](const DeltaEval& v, double x) {
        if (check_real && std::abs(v.value.imag()) > 1e-10 * std::max(v.scale, std::abs(v.value)))
            throw SearchError("Delta is not real on the real axis near lambda=" + std::to_string(x) +
                              "; use a complex search");
    };
    check(va, xa);
    for (int i = 1; i < n && static_cast<int>(out.size()) < max_count; ++i) {
        const double xb = i + 1 == n ? xmax : detail::from_s(s0 + (s1 - s0) * i / (n - 1));
        DeltaEval vb = f(xb);
        check(vb, xb);
        const double fa = va.value.real(), fb = vb.value.real();
        double root = std::numeric_limits<double>::quiet_NaN();
        if (fa == 0.0) {
            if (out.empty() || out.back().lambda.real() != xa) root = xa;
        } else if (fb != 0.0 && (fa < 0) != (fb < 0)) {
            root = detail::refine_real(f, xa, fa, xb, fb, tol);
        } else if (fb == 0.0 && i + 1 == n) {
            root = xb;
        }
        if (std::isfinite(root)) {
            auto v = f(root);
            Zero z;
            z.lambda = root;
            z.ddelta = v.dvalue;
            z.dscale = detail::secant_scale(f, root);
            z.multiplicity_estimate = simplicity_check(z) ? 1 : 2;
            out.push_back(z);
        }
        xa = xb;
        va = vb;
    }
    return out;
}

inline std::vector<Zero> find_real_zeros(const Problem& pr, const SpectrumRequest& rq) {
    auto out = find_real_zeros_fn(delta_function(pr, rq.j, rq.k), rq.xmin, rq.xmax, rq.max_count,
                                  rq.refine_tol, true);
    for (auto& z : out) {
        z.j = rq.j;
        z.k = rq.k;
    }
    return out;
}

namespace detail {

struct EdgeSample {
    cplx lam;
    DeltaEval v;
};

// Samples along the closed rectangle boundary, refined so the phase of f
// changes by less than 0.5 rad between neighbours. Returns false when f comes
// too close to zero on the boundary.
inline bool sample_boundary(const DeltaFn& f, cplx lo, cplx hi, std::vector<EdgeSample>& pts) {
    const std::array<cplx, 5> corner{lo, cplx(hi.real(), lo.imag()), hi, cplx(lo.real(), hi.imag()), lo};
    pts.clear();
    constexpr int base = 8;
    for (int e = 0; e < 4; ++e) {
        std::vector<EdgeSample> edge;
        for (int i = 0; i <= base; ++i) {
            cplx z = corner[e] + (corner[e + 1] - corner[e]) * (double(i) / base);
            edge.push_back({z, f(z)});
        }
        for (std::size_t i = 0; i + 1 < edge.size();) {
            const auto& l = edge[i];
            const auto& r = edge[i + 1];
            if (std::abs(l.v.value) < 1e-12 * l.v.scale) return false;
            const double dphi = std::abs(std::arg(r.v.value / l.v.value));
            if (dphi > 0.5 && std::abs(r.lam - l.lam) > 1e-9 * (1.0 + std::abs(l.lam))) {
                cplx m = 0.5 * (l.lam + r.lam);
                edge.insert(edge.begin() + static_cast<long>(i) + 1, EdgeSample{m, f(m)});
                continue;
            }
            ++i;
        }
        edge.pop_back();
        pts.insert(pts.end(), edge.begin(), edge.end());
    }
    return true;
}

inline int winding(const std::vector<EdgeSample>& pts) {
    double total = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        total += std::arg(b.v.value / a.v.value);
    }
    return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

// (2 pi i)^{-1} \oint lambda f'/f by the trapezoid rule on the boundary samples.
inline cplx first_moment(const std::vector<EdgeSample>& pts) {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        cplx ga = a.lam * a.v.dvalue / a.v.value, gb = b.lam * b.v.dvalue / b.v.value;
        acc += 0.5 * (ga + gb) * (b.lam - a.lam);
    }
    return acc / cplx(0.0, 2.0 * std::numbers::pi);
}

inline bool newton_complex(const DeltaFn& f, cplx& z, cplx lo, cplx hi, double tol) {
    for (int it = 0; it < 60; ++it) {
        auto v = f(z);
        if (v.value == cplx(0.0)) return true;
        if (v.dvalue == cplx(0.0)) return false;
        cplx dz = v.value / v.dvalue;
        z -= dz;
        if (!finite(z)) return false;
        if (std::abs(dz) <= tol * (1.0 + std::abs(z)))
            return z.real() >= lo.real() && z.real() <= hi.real() && z.imag() >= lo.imag() &&
                   z.imag() <= hi.imag();
    }
    return false;
}

inline void complex_search(const DeltaFn& f, cplx lo, cplx hi, double tol, int depth, std::vector<Zero>& out,
                           int& wound) {
    std::vector<EdgeSample> pts;
    // nudge the rectangle outward when a zero sits on its boundary
    for (int attempt = 0; !sample_boundary(f, lo, hi, pts); ++attempt) {
        if (attempt > 6)
            throw SearchError("zero on rectangle boundary could not be avoided near (" + std::to_string(lo.real()) +
                              "," + std::to_string(lo.imag()) + ")-(" + std::to_string(hi.real()) + "," +
                              std::to_string(hi.imag()) + ")");
        const cplx d = (hi - lo) * (1e-3 * (attempt + 1));
        lo -= cplx(d.real(), d.imag()) * 0.37;
        hi += cplx(d.real(), d.imag()) * 0.41;
    }
    const int n = winding(pts);
    if (n <= 0) return;
    if (n == 1) {
        cplx z = first_moment(pts);
        if (newton_complex(f, z, lo, hi, tol)) {
            Zero zr;
            zr.lambda = z;
            auto v = f(z);
            zr.ddelta = v.dvalue;
            zr.dscale = detail::secant_scale(f, z);
            zr.multiplicity_estimate = 1;
            out.push_back(zr);
            wound += 1;
            return;
        }
    }
    if (depth == 0 || std::abs(hi - lo) < 1e-8 * (1.0 + std::abs(lo))) {
        Zero zr;
        zr.lambda = 0.5 * (lo + hi);
        cplx z = n == 1 ? first_moment(pts) : zr.lambda;
        auto v = f(z);
        zr.lambda = z;
        zr.ddelta = v.dvalue;
        zr.dscale = detail::secant_scale(f, z);
        zr.multiplicity_estimate = n;
        out.push_back(zr);
        wound += n;
        return;
    }
    const cplx mid = 0.5 * (lo + hi);
    complex_search(f, lo, mid, tol, depth - 1, out, wound);
    complex_search(f, cplx(mid.real(), lo.imag()), cplx(hi.real(), mid.imag()), tol, depth - 1, out, wound);
    complex_search(f, mid, hi, tol, depth - 1, out, wound);
    complex_search(f, cplx(lo.real(), mid.imag()), cplx(mid.real(), hi.imag()), tol, depth - 1, out, wound);
}

// Convention for complex lists: by modulus, then argument.
inline void sort_modulus_arg(std::vector<Zero>& zs) {
    std::sort(zs.begin(), zs.end(), [](const Zero& l, const Zero& r) {
        const double al = std::abs(l.lambda), ar = std::abs(r.lambda);
        if (std::abs(al - ar) > 1e-12 * (1.0 + al)) return al < ar;
        return std::arg(l.lambda) < std::arg(r.lambda);
    });
}

} // namespace detail

/// Argument-principle search in the rectangle [lo, hi]. Zeros that straddle
/// two sub-rectangles can be reported twice; duplicates are merged.
inline std::vector<Zero> find_complex_zeros_fn(const DeltaFn& f, cplx lo, cplx hi, int max_count, double tol,
                                               int max_depth = 8) {
    if (!(hi.real() > lo.real() && hi.imag() > lo.imag())) throw SearchError("degenerate rectangle");
    std::vector<detail::EdgeSample> pts;
    cplx l = lo, h = hi;
    for (int attempt = 0; !detail::sample_boundary(f, l, h, pts); ++attempt) {
        if (attempt > 6) throw SearchError("zero on rectangle boundary could not be avoided");
        const cplx d = (h - l) * (1e-3 * (attempt + 1));
        l -= d * 0.37;
        h += d * 0.41;
    }
    const int total = detail::winding(pts);
    std::vector<Zero> out;
    int wound = 0;
    if (total > 0) detail::complex_search(f, l, h, tol, max_depth, out, wound);
    // merge duplicates produced by boundary nudging in sub-rectangles
    std::vector<Zero> merged;
    for (auto& z : out) {
        bool dup = false;
        for (auto& m : merged)
            if (std::abs(m.lambda - z.lambda) < 1e-7 * (1.0 + std::abs(z.lambda))) dup = true;
        if (!dup) merged.push_back(z);
    }
    int count = 0;
    for (auto& z : merged) count += z.multiplicity_estimate;
    if (count != total)
        throw SearchError("winding/refinement count mismatch: winding " + std::to_string(total) + ", found " +
                          std::to_string(count));
    detail::sort_modulus_arg(merged);
    if (static_cast<int>(merged.size()) > max_count) merged.resize(static_cast<std::size_t>(max_count));
    return merged;
}

inline std::vector<Zero> find_complex_zeros(const Problem& pr, const SpectrumRequest& rq) {
    auto out = find_complex_zeros_fn(delta_function(pr, rq.j, rq.k), rq.lo, rq.hi, rq.max_count, rq.refine_tol);
    for (auto& z : out) {
        z.j = rq.j;
        z.k = rq.k;
    }
    return out;
}

/// First `count` zeros of Delta_jk. Real problems scan the real axis from
/// `lower`, doubling the interval until enough zeros are found; complex
/// problems search growing rectangles around the positive real axis.
inline std::vector<Zero> first_zeros(const Problem& pr, int j, int k, int count, double lower = -50.0) {
    SpectrumRequest rq;
    rq.j = j;
    rq.k = k;
    rq.max_count = count;
    rq.refine_tol = pr.tol().root_tol;
    double hi = 1000.0;
    for (int round = 0; round < 12; ++round, hi *= 4.0) {
        std::vector<Zero> zs;
        if (pr.is_real()) {
            rq.xmin = lower;
            rq.xmax = hi;
            zs = find_real_zeros(pr, rq);
        } else {
            rq.lo = cplx(lower, -0.1 * hi - 50.0);
            rq.hi = cplx(hi, 0.1 * hi + 50.0);
            rq.max_count = 100000;
            zs = find_complex_zeros(pr, rq);
            rq.max_count = count;
        }
        if (static_cast<int>(zs.size()) >= count) {
            zs.resize(static_cast<std::size_t>(count));
            return zs;
        }
    }
    throw SearchError("could not locate " + std::to_string(count) + " zeros of Delta_" + std::to_string(j) +
                      std::to_string(k));
}

struct BarcilonData {
    std::vector<cplx> s12, s13, s23;
};

inline std::vector<cplx> lambdas(const std::vector<Zero>& zs) {
    std::vector<cplx> out;
    for (auto& z : zs) out.push_back(z.lambda);
    return out;
}

/// The three spectra: zeros of Delta_22, Delta_32 and Delta_42.
inline BarcilonData three_spectra(const Problem& pr, int count, double lower = -50.0) {
    BarcilonData b;
    b.s12 = lambdas(first_zeros(pr, 2, 2, count, lower));
    b.s13 = lambdas(first_zeros(pr, 3, 2, count, lower));
    b.s23 = lambdas(first_zeros(pr, 4, 2, count, lower));
    return b;
}

/// d(lambda) = U_2(S_3) U_3(S_4) - U_3(S_3) U_2(S_4), whose zeros are the
/// spectrum of the U_2 = U_3 = 0 problem.
inline DeltaEval bracket_d(const Problem& pr, cplx lambda) {
    PropagateOptions o;
    o.want_dlambda = true;
    auto fs = fundamental_S(pr, lambda, o);
    const Mat4 U = boundary_form_matrix(pr, End::left);
    const Mat4 us = U * fs.fm.final();
    const Mat4 dus = U * fs.dvalues.back();
    DeltaEval e;
    e.value = us(1, 2) * us(2, 3) - us(2, 2) * us(1, 3);
    e.dvalue = dus(1, 2) * us(2, 3) + us(1, 2) * dus(2, 3) - dus(2, 2) * us(1, 3) - us(2, 2) * dus(1, 3);
    e.scale = us.col(2).norm() * us.col(3).norm();
    return e;
}

} // namespace qspec
