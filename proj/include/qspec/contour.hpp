#pragma once

#include "qspec/types.hpp"

#include <functional>
#include <map>
#include <numbers>
#include <vector>

namespace qspec {

/// Laurent coefficients of a matrix function on |lambda - center| = radius by the
/// N-node trapezoid rule:  A_k = N^{-1} sum_j F(lambda_j) (radius e^{i theta_j})^{-k}.
struct LaurentResult {
    std::map<int, Mat4> coeff;
    std::map<int, Mat4> coeff_doubled; // same with 2N nodes
    double doubling_change = 0.0;      // max entry change between N and 2N, relative to 1 + max |A|
    double radius = 0.0;
    int nodes = 0;
};

namespace detail {

// Pairwise summation keeps the reduction order fixed and independent of N.
inline Mat4 pairwise_sum(const std::vector<Mat4>& v, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return v[lo];
    std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

} // namespace detail

inline LaurentResult laurent_trapezoid(const std::function<Mat4(cplx)>& f, cplx center, double radius,
                                       const std::vector<int>& orders, int nodes) {
    if (radius <= 0) throw Error("contour", "radius must be positive");
    LaurentResult r;
    r.radius = radius;
    r.nodes = nodes;
    std::vector<Mat4> vals(static_cast<std::size_t>(2 * nodes));
    std::vector<cplx> ez(vals.size());
    for (int i = 0; i < 2 * nodes; ++i) {
        ez[i] = std::polar(1.0, std::numbers::pi * i / nodes);
        vals[i] = f(center + radius * ez[i]);
    }
    double amax = 0.0, change = 0.0;
    for (int k : orders) {
        std::vector<Mat4> even, all;
        for (int i = 0; i < 2 * nodes; ++i) {
            Mat4 t = vals[i] * std::pow(radius * ez[i], -k);
            all.push_back(t);
            if (i % 2 == 0) even.push_back(t);
        }
        Mat4 a = detail::pairwise_sum(even, 0, even.size()) / double(nodes);
        Mat4 b = detail::pairwise_sum(all, 0, all.size()) / double(2 * nodes);
        r.coeff[k] = a;
        r.coeff_doubled[k] = b;
        amax = std::max(amax, max_abs(b));
        change = std::max(change, max_abs(Mat4(a - b)));
    }
    r.doubling_change = change / (1.0 + amax);
    return r;
}

/// Scalar version used for residues of a single entry.
inline cplx residue_trapezoid(const std::function<cplx(cplx)>& f, cplx center, double radius, int nodes) {
    std::vector<Mat4> terms;
    for (int i = 0; i < nodes; ++i) {
        cplx e = std::polar(1.0, 2.0 * std::numbers::pi * i / nodes);
        Mat4 t = Mat4::Zero();
        t(0, 0) = f(center + radius * e) * radius * e;
        terms.push_back(t);
    }
    return detail::pairwise_sum(terms, 0, terms.size())(0, 0) / double(nodes);
}

} // namespace qspec
