#pragma once

#include "qspec/contour.hpp"
#include "qspec/spectra.hpp"

#include <optional>

namespace qspec {

enum class CaseTag { I, II, III, IV, V, indeterminate, unknown };

inline const char* case_name(CaseTag t) {
    switch (t) {
    case CaseTag::I: return "I";
    case CaseTag::II: return "II";
    case CaseTag::III: return "III";
    case CaseTag::IV: return "IV";
    case CaseTag::V: return "V";
    case CaseTag::indeterminate: return "indeterminate";
    default: return "unknown";
    }
}

struct SpectralPoint {
    cplx lambda = 0.0;
    cplx gamma = 0.0; // y_n(0)
    cplx xi = 0.0;    // y_n'(0)
    std::optional<cplx> beta;
    bool norm_ok = false;
    CaseTag case_tag = CaseTag::unknown;
    cplx ddelta22 = 0.0;
    bool simple = true;
    std::optional<cplx> beta_residue; // (3,2) residue from the contour, when extracted
};

/// |\int y^2| below this (for a unit null vector) means the eigenfunction cannot be normalised.
inline constexpr double kNormFloor = 1e-8;

struct Eigenfunction {
    cplx lambda = 0.0;
    cplx c3 = 0.0, c4 = 0.0; // y = c3 C_3 + c4 C_4 after normalisation
    cplx gamma = 0.0, xi = 0.0;
    cplx raw_norm = 0.0;     // \int y^2 for the unit null vector
    bool norm_ok = false;
    std::array<double, 4> residuals{}; // |V_1(y)|, |V_2(y)|, |U_1(y)|, |U_2(y)|
    std::vector<double> x;
    std::vector<Vec4> values; // quasi-state of y on x (when requested)
};

namespace detail {

// Re gamma > 0, else Im gamma > 0; if gamma vanishes the rule moves to xi.
inline bool needs_flip(cplx g, cplx x) {
    auto decide = [](cplx v, bool& flip) {
        const double tiny = 1e-13 * std::abs(v);
        if (std::abs(v.real()) > tiny) { flip = v.real() < 0; return true; }
        if (std::abs(v.imag()) > tiny) { flip = v.imag() < 0; return true; }
        return false;
    };
    bool flip = false;
    if (std::abs(g) > 1e-300 && decide(g, flip)) return flip;
    if (decide(x, flip)) return flip;
    return false;
}

} // namespace detail

/// y = c3 C_3 + c4 C_4 with (c3, c4) the smallest singular direction of the
/// 2x2 end matrix. The normalising integral comes from a second pass that
/// propagates y itself: the gram entries of C_3, C_4 are of size exp(2|rho|)
/// and their combination would lose that many digits.
inline Eigenfunction eigenfunction(const Problem& pr, cplx lambda, const std::vector<double>& xs = {}) {
    auto fc = fundamental_C(pr, lambda);
    const Mat4& C1 = fc.fm.final();
    Eigen::Matrix2cd E;
    E << C1(0, 2), C1(0, 3), C1(1, 2), C1(1, 3);
    Eigen::JacobiSVD<Eigen::Matrix2cd> svd(E, Eigen::ComputeFullV);
    Eigen::Vector2cd v = svd.matrixV().col(1);

    const Mat4& C0 = fc.fm.values.front();
    Mat4 init = Mat4::Zero();
    init.col(0) = C0.col(2) * v(0) + C0.col(3) * v(1);
    PropagateOptions o;
    o.quadrature = Quadrature::gram;
    o.output_x = xs;
    auto fy = propagate(pr, lambda, Direction::forward, init, o);

    Eigenfunction ef;
    ef.lambda = lambda;
    ef.raw_norm = fy.quadrature(0, 0);
    if (std::abs(ef.raw_norm) < kNormFloor) {
        ef.norm_ok = false;
        return ef;
    }
    ef.norm_ok = true;
    cplx s = 1.0 / std::sqrt(ef.raw_norm);
    Vec4 y0 = init.col(0) * s;
    if (detail::needs_flip(y0(0), y0(1))) s = -s;
    y0 = init.col(0) * s;
    ef.c3 = v(0) * s;
    ef.c4 = v(1) * s;
    ef.gamma = y0(0);
    ef.xi = y0(1);
    const Vec4 y1 = fy.fm.final().col(0) * s;
    const Vec4 u = boundary_form_matrix(pr, End::left) * y0;
    ef.residuals = {std::abs(y1(0)), std::abs(y1(1)), std::abs(u(0)), std::abs(u(1))};
    for (double x : xs) {
        ef.x.push_back(x);
        ef.values.push_back(fy.fm.at_x(x).col(0) * s);
    }
    return ef;
}

/// Residue of m_32 = -Delta_32/Delta_22 at lambda0 by trapezoid quadrature.
inline cplx residue_m32(const Problem& pr, cplx lambda0, double radius, int nodes) {
    auto m32 = [&](cplx lam) {
        PropagateOptions o;
        auto fc = fundamental_C(pr, lam, o);
        Mat4 dz = Mat4::Zero();
        auto d22 = detail::minor_delta(fc.fm.final(), dz, 2, 2, false);
        auto d32 = detail::minor_delta(fc.fm.final(), dz, 3, 2, false);
        return -d32.value / d22.value;
    };
    return residue_trapezoid(m32, lambda0, radius, nodes);
}

inline double default_residue_radius(const std::vector<Zero>& zs, std::size_t i) {
    double dist = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < zs.size(); ++j)
        if (j != i) dist = std::min(dist, std::abs(zs[j].lambda - zs[i].lambda));
    return std::min(1.0 + std::abs(zs[i].lambda) / 100.0, 0.25 * dist);
}

struct WeightNumberOptions {
    bool extract_residue = true;
    int nodes = 64;
    double radius = 0.0; // 0: per-point default
    double gamma_floor = 1e-6;
};

/// McLaughlin data for a list of simple zeros of Delta_22. beta = -gamma^2 is
/// set only when gamma != 0 and Delta_33 does not vanish there; the contour
/// residue of m_32 is recorded independently in beta_residue.
inline std::vector<SpectralPoint> weight_numbers(const Problem& pr, const std::vector<Zero>& zeros,
                                                 const WeightNumberOptions& opt = {}) {
    std::vector<SpectralPoint> out;
    for (std::size_t i = 0; i < zeros.size(); ++i) {
        const Zero& z = zeros[i];
        SpectralPoint sp;
        sp.lambda = z.lambda;
        sp.ddelta22 = z.ddelta;
        sp.simple = simplicity_check(z);
        if (!sp.simple) throw Error("non-simple", "eigenvalue is not simple; weight numbers are undefined");
        auto ef = eigenfunction(pr, z.lambda);
        sp.norm_ok = ef.norm_ok;
        if (ef.norm_ok) {
            sp.gamma = ef.gamma;
            sp.xi = ef.xi;
            auto d33 = characteristic_delta(pr, z.lambda, 3, 3, false);
            const bool d33_zero = std::abs(d33.value) < 1e-8 * d33.scale;
            if (std::abs(sp.gamma) > opt.gamma_floor && !d33_zero) sp.beta = -sp.gamma * sp.gamma;
        }
        if (opt.extract_residue) {
            double r = opt.radius > 0 ? opt.radius : default_residue_radius(zeros, i);
            sp.beta_residue = residue_m32(pr, z.lambda, r, opt.nodes);
        }
        out.push_back(sp);
    }
    return out;
}

} // namespace qspec
