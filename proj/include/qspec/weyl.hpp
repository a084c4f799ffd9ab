#pragma once

#include "qspec/propagator.hpp"

#include <array>
#include <vector>
#include <numbers>

namespace qspec {

struct CharacteristicValue {
    int j = 0, k = 0;
    cplx value = 0.0;
    cplx dvalue = 0.0;  // d/dlambda, zero unless requested
    double scale = 1.0; // product of column norms over the rows involved (pole floor reference)
};

/// Storage order used everywhere (CSV, JSON): 11 21 31 41 22 32 42 33 43.
inline constexpr std::array<std::array<int, 2>, 9> kDeltaOrder{
    {{1, 1}, {2, 1}, {3, 1}, {4, 1}, {2, 2}, {3, 2}, {4, 2}, {3, 3}, {4, 3}}};

inline int delta_slot(int j, int k) {
    for (int i = 0; i < 9; ++i)
        if (kDeltaOrder[i][0] == j && kDeltaOrder[i][1] == k) return i;
    throw Error("usage", "no characteristic function Delta_" + std::to_string(j) + std::to_string(k));
}

struct CharacteristicSet {
    cplx lambda = 0.0;
    std::array<CharacteristicValue, 9> d;
    Mat4 C1, dC1; // C(1, lambda) and its lambda-derivative
    Mat4 S0, dS0; // S(0, lambda) and its lambda-derivative
    // 3x3 determinant route for the k = 1 column, kept for cross-checks
    cplx d11_direct = 0.0, d21_direct = 0.0, d31_direct = 0.0, d41_direct = 0.0;
    bool has_dlambda = false;

    const CharacteristicValue& operator()(int j, int k) const { return d[delta_slot(j, k)]; }
};

namespace detail {

// Product of column norms over the rows y, y' and those of the minor (highest
// row index `top`). Row y^[3] is never involved, so the rho^3 factor it carries
// at large |lambda| does not inflate the floor.
inline double column_scale(const Mat4& C, const std::vector<int>& cols, int top) {
    const int hi = std::max(top, 1);
    double s = 1.0;
    for (int c : cols) s *= C.col(c).head(hi + 1).norm();
    return s;
}

// Minor built from end values of C-columns per the rule: rows V_{5-s}, s = k+1..4
// (so y'', y', y for k = 1), columns C_r, r = k+1..4 with C_j replaced by C_k.
inline CharacteristicValue minor_delta(const Mat4& C, const Mat4& dC, int j, int k, bool want_d) {
    const int n = 4 - k;
    std::array<int, 3> rows{}, cols{};
    for (int i = 0; i < n; ++i) {
        int s = k + 1 + i;
        rows[i] = 4 - s; // V_{5-s} reads component 5-s-1
        int r = s;
        cols[i] = (r == j ? k : r) - 1;
    }
    auto det_with = [&](int replaced) {
        Eigen::Matrix<cplx, 3, 3> a;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c)
                a(r, c) = (c == replaced ? dC : C)(rows[r], cols[c]);
        if (n == 1) return a(0, 0);
        if (n == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        return a.determinant();
    };
    CharacteristicValue v;
    v.j = j;
    v.k = k;
    v.value = det_with(-1);
    if (want_d)
        for (int c = 0; c < n; ++c) v.dvalue += det_with(c);
    v.scale = detail::column_scale(C, std::vector<int>(cols.begin(), cols.begin() + n), rows[0]);
    return v;
}

// Delta_11 = -C_4(1), Delta_21 = -C_3(1). The 3x3 minors cancel down to these
// entries and lose about exp(2 rho) in relative accuracy on the way.
inline void identity_route_c(CharacteristicValue& d11, CharacteristicValue& d21, const Mat4& C, const Mat4& dC) {
    d11.value = -C(0, 3);
    d11.dvalue = -dC(0, 3);
    d11.scale = C.col(3).head(2).norm();
    d21.value = -C(0, 2);
    d21.dvalue = -dC(0, 2);
    d21.scale = C.col(2).head(2).norm();
}

} // namespace detail

/// All nine Delta_jk at lambda. The k = 1 column is reported through single
/// entries: Delta_11 = -C_4(1), Delta_21 = -C_3(1), Delta_31 = -S_4(0),
/// Delta_41 = -S_4'(0). The direct 3x3 values are kept in d*_direct.
inline CharacteristicSet characteristic_all(const Problem& pr, cplx lambda, bool want_dlambda = true) {
    PropagateOptions o;
    o.want_dlambda = want_dlambda;
    auto fc = fundamental_C(pr, lambda, o);
    auto fs = fundamental_S(pr, lambda, o);
    CharacteristicSet cs;
    cs.lambda = lambda;
    cs.has_dlambda = want_dlambda;
    cs.C1 = fc.fm.final();
    cs.dC1 = want_dlambda ? fc.dvalues.back() : Mat4::Zero();
    cs.S0 = fs.fm.final();
    cs.dS0 = want_dlambda ? fs.dvalues.back() : Mat4::Zero();
    for (int i = 0; i < 9; ++i) {
        auto [j, k] = kDeltaOrder[i];
        cs.d[i] = detail::minor_delta(cs.C1, cs.dC1, j, k, want_dlambda);
    }
    cs.d11_direct = cs.d[0].value;
    cs.d21_direct = cs.d[1].value;
    cs.d31_direct = cs.d[2].value;
    cs.d41_direct = cs.d[3].value;
    detail::identity_route_c(cs.d[0], cs.d[1], cs.C1, cs.dC1);
    const double s4 = cs.S0.col(3).head(2).norm();
    cs.d[2].value = -cs.S0(0, 3);
    cs.d[2].dvalue = -cs.dS0(0, 3);
    cs.d[2].scale = s4;
    cs.d[3].value = -cs.S0(1, 3);
    cs.d[3].dvalue = -cs.dS0(1, 3);
    cs.d[3].scale = s4;
    return cs;
}

/// Single Delta_jk. Forward-only unless jk is 31 or 41.
inline CharacteristicValue characteristic_delta(const Problem& pr, cplx lambda, int j, int k,
                                                bool want_dlambda = true) {
    delta_slot(j, k);
    if (k == 1 && (j == 3 || j == 4)) return characteristic_all(pr, lambda, want_dlambda)(j, k);
    PropagateOptions o;
    o.want_dlambda = want_dlambda;
    auto fc = fundamental_C(pr, lambda, o);
    Mat4 dC = want_dlambda ? fc.dvalues.back() : Mat4::Zero();
    auto v = detail::minor_delta(fc.fm.final(), dC, j, k, want_dlambda);
    if (k == 1) {
        CharacteristicValue other = v;
        if (j == 1) detail::identity_route_c(v, other, fc.fm.final(), dC);
        else detail::identity_route_c(other, v, fc.fm.final(), dC);
    }
    return v;
}

/// |Delta_kk| below this multiple of its column-norm scale counts as a zero.
inline constexpr double kPoleFloor = 1e-10;

struct WeylSample {
    cplx lambda = 0.0;
    Mat4 m = Mat4::Identity();
    CharacteristicSet deltas;
};

inline Mat4 weyl_from_deltas(const CharacteristicSet& cs, double floor = kPoleFloor) {
    for (int k = 1; k <= 3; ++k) {
        const auto& dk = cs(k, k);
        if (std::abs(dk.value) < floor * dk.scale) throw PoleError(k, cs.lambda);
    }
    Mat4 m = Mat4::Identity();
    for (auto [j, k] : kDeltaOrder)
        if (j > k) m(j - 1, k - 1) = -cs(j, k).value / cs(k, k).value;
    return m;
}

inline WeylSample weyl_matrix(const Problem& pr, cplx lambda) {
    WeylSample w;
    w.lambda = lambda;
    w.deltas = characteristic_all(pr, lambda, true);
    w.m = weyl_from_deltas(w.deltas);
    return w;
}

/// Closed-form inverse of a Weyl-Yurko matrix from its own entries.
inline Mat4 weyl_inverse_of(const Mat4& m) {
    Mat4 r = Mat4::Identity();
    r(1, 0) = -m(3, 2);
    r(2, 0) = m(3, 1);
    r(2, 1) = -m(2, 1);
    r(3, 0) = -m(3, 0);
    r(3, 1) = m(2, 0);
    r(3, 2) = -m(1, 0);
    return r;
}

inline Mat4 weyl_inverse(const Problem& pr, cplx lambda) { return weyl_inverse_of(weyl_matrix(pr, lambda).m); }

/// m21 - m43 and m31 - m21 m32 + m42 for one sample.
struct WeylIdentityResidual {
    double m21_m43 = 0.0;     // |m21 - m43| / (1 + |m43|)
    double relm31 = 0.0;      // |m31 - m21 m32 + m42| / (1 + |m21 m32|)
    double inverse = 0.0;     // max |M * Minv - I|
};

inline WeylIdentityResidual weyl_identities(const Mat4& m) {
    WeylIdentityResidual r;
    r.m21_m43 = std::abs(m(1, 0) - m(3, 2)) / (1.0 + std::abs(m(3, 2)));
    r.relm31 = std::abs(m(2, 0) - m(1, 0) * m(2, 1) + m(3, 1)) / (1.0 + std::abs(m(1, 0) * m(2, 1)));
    r.inverse = max_abs(Mat4(m * weyl_inverse_of(m) - Mat4::Identity()));
    return r;
}

/// Residuals of Delta_11 = -C_4(1), Delta_21 = -C_3(1), Delta_31 = -S_4(0) and
/// Delta_41 = -S_4'(0), each against its 3x3 determinant.
inline std::array<double, 4> aux1_residuals(const CharacteristicSet& cs) {
    const cplx c4 = cs.C1(0, 3), c3 = cs.C1(0, 2), s4 = cs.S0(0, 3), s4p = cs.S0(1, 3);
    return {std::abs(cs.d11_direct + c4) / (1.0 + std::abs(c4)),
            std::abs(cs.d21_direct + c3) / (1.0 + std::abs(c3)),
            std::abs(cs.d31_direct + s4) / (1.0 + std::abs(s4)),
            std::abs(cs.d41_direct + s4p) / (1.0 + std::abs(s4p))};
}

/// Phi(x, lambda) = C(x, lambda) M(lambda) on the requested nodes.
inline std::vector<Mat4> phi(const Problem& pr, cplx lambda, const std::vector<double>& xs) {
    Mat4 m = weyl_matrix(pr, lambda).m;
    PropagateOptions o;
    o.output_x = xs;
    auto fc = fundamental_C(pr, lambda, o);
    std::vector<Mat4> out;
    for (double x : xs) out.push_back(fc.fm.at_x(x) * m);
    return out;
}

struct AnalyticityReport {
    double zero_count = 0.0;   // (2 pi i)^{-1} \oint Delta'/Delta
    double cauchy_ratio = 0.0; // |\oint Delta| / (2 pi r max|Delta|), ~0 for an entire function
};

/// Trapezoid contour checks of Delta_jk on |lambda - center| = r.
inline AnalyticityReport analyticity_check(const Problem& pr, int j, int k, cplx center, double r,
                                           int nodes = 64) {
    cplx wind = 0.0, integral = 0.0;
    double vmax = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const cplx e = std::polar(1.0, 2.0 * std::numbers::pi * i / nodes);
        const cplx lam = center + r * e;
        auto v = characteristic_delta(pr, lam, j, k, true);
        const cplx dl = r * e * cplx(0, 2.0 * std::numbers::pi / nodes);
        wind += v.dvalue / v.value * dl;
        integral += v.value * dl;
        vmax = std::max(vmax, std::abs(v.value));
    }
    AnalyticityReport rep;
    rep.zero_count = (wind / cplx(0, 2.0 * std::numbers::pi)).real();
    rep.cauchy_ratio = std::abs(integral) / (2.0 * std::numbers::pi * r * std::max(vmax, 1e-300));
    return rep;
}

} // namespace qspec
