#pragma once

#include "qspec/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace qspec {

enum class Direction { forward, backward };

/// Extra scalar states integrated alongside Y.
/// gram:  Q_ij = \int_0^1 Y_1i Y_1j dx  (first row = solution values)
/// cross: Q_ij = \int_0^1 Y_1i Z_1j dx  with Z the solution at a second spectral parameter mu
enum class Quadrature { none, gram, cross };

struct PropagateOptions {
    bool want_dlambda = false;
    Quadrature quadrature = Quadrature::none;
    cplx mu = 0.0;
    std::optional<Mat4> init_mu; // defaults to init
    std::vector<double> output_x; // forced nodes whose values are recorded
    bool record_steps = false;    // also record every accepted step
};

struct FundamentalMatrix {
    cplx lambda = 0.0;
    std::vector<double> at;
    std::vector<Mat4> values;
    double det_drift = 0.0;

    const Mat4& final() const { return values.back(); }

    /// Value at a recorded node; throws if x was not recorded.
    const Mat4& at_x(double x) const {
        for (std::size_t i = 0; i < at.size(); ++i)
            if (std::abs(at[i] - x) < 1e-13) return values[i];
        throw Error("propagation", "x=" + std::to_string(x) + " was not a recorded node");
    }
};

struct LambdaJet {
    Mat4 value;
    Mat4 dlambda;
};

struct Propagation {
    FundamentalMatrix fm;
    std::vector<Mat4> dvalues;         // d/dlambda along fm.at (want_dlambda)
    std::optional<FundamentalMatrix> partner; // trajectory at mu (cross quadrature)
    Mat4 quadrature = Mat4::Zero();    // oriented as \int_0^1 for either direction
    int steps = 0;
    int rejected = 0;

    LambdaJet jet() const { return {fm.final(), dvalues.empty() ? Mat4::Zero() : dvalues.back()}; }
};

namespace detail {

// Dormand-Prince 5(4) tableau
struct DP45 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
};

// Blocks, 4 columns each: Y | dY/dlambda | Z | Q
using Block = Eigen::Matrix<cplx, 4, 16>;

struct Rhs {
    cplx lambda, mu;
    bool jet, cross, quad;
    bool gram;

    void operator()(cplx p, cplx q, const Block& s, Block& out) const {
        out.setZero();
        apply(p, q, lambda, s.middleCols<4>(0), out.middleCols<4>(0));
        if (jet) {
            apply(p, q, lambda, s.middleCols<4>(4), out.middleCols<4>(4));
            out.block<1, 4>(3, 4) += s.block<1, 4>(0, 0);
        }
        if (cross) apply(p, q, mu, s.middleCols<4>(8), out.middleCols<4>(8));
        if (quad) {
            auto y0 = s.block<1, 4>(0, 0);
            auto z0 = gram ? s.block<1, 4>(0, 0) : s.block<1, 4>(0, 8);
            out.middleCols<4>(12) = y0.transpose() * z0;
        }
    }

    template <class In, class Out>
    static void apply(cplx p, cplx q, cplx lam, const In& y, Out&& o) {
        o.row(0) = y.row(1);
        o.row(1) = y.row(2);
        o.row(2) = p * y.row(1) + y.row(3);
        o.row(3) = (lam - q) * y.row(0);
    }
};

// The trajectory columns grow like exp(|lambda|^{1/4} x) while det stays 1, so
// the determinant is formed in extended precision to keep the cancellation out
// of the drift figure.
template <class M>
cplx det_ld(const M& m) {
    using cld = std::complex<long double>;
    Eigen::Matrix<cld, 4, 4> l = Mat4(m).template cast<cld>();
    cld d = l.determinant();
    return {static_cast<double>(d.real()), static_cast<double>(d.imag())};
}

inline double err_norm(const Block& err, const Block& y0, const Block& y1, double rtol,
                       double atol, int ncols_mask) {
    double e = 0.0;
    for (int j = 0; j < 16; ++j) {
        if (!(ncols_mask & (1 << (j / 4)))) continue;
        double sc = std::max(y0.col(j).cwiseAbs().maxCoeff(), y1.col(j).cwiseAbs().maxCoeff());
        double ej = err.col(j).cwiseAbs().maxCoeff() / (atol + rtol * sc);
        e = std::max(e, ej);
    }
    return e;
}

} // namespace detail

/// Integrates Y' = (F(x) + Lambda) Y over [0,1] from x=0 (forward) or x=1 (backward).
inline Propagation propagate(const Problem& pr, cplx lambda, Direction dir, const Mat4& init,
                             const PropagateOptions& opt = {}) {
    using detail::Block;
    using T = detail::DP45;
    if (!finite(lambda)) throw PropagationError("non-finite lambda", dir == Direction::forward ? 0.0 : 1.0);

    const bool cross = opt.quadrature == Quadrature::cross;
    detail::Rhs rhs{lambda, opt.mu, opt.want_dlambda, cross, opt.quadrature != Quadrature::none,
                    opt.quadrature == Quadrature::gram};
    int mask = 1 | (opt.want_dlambda ? 2 : 0) | (cross ? 4 : 0) |
               (opt.quadrature != Quadrature::none ? 8 : 0);

    std::vector<double> nodes = pr.nodes();
    for (double x : opt.output_x) {
        if (!(x >= 0.0 && x <= 1.0)) throw Error("propagation", "output node outside [0,1]");
        nodes.push_back(x);
    }
    nodes.push_back(0.0);
    nodes.push_back(1.0);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end(), [](double l, double r) { return std::abs(l - r) < 1e-15; }),
                nodes.end());
    if (dir == Direction::backward) std::reverse(nodes.begin(), nodes.end());

    auto is_output = [&](double x) {
        if (x == 0.0 || x == 1.0) return true;
        for (double o : opt.output_x)
            if (std::abs(o - x) < 1e-15) return true;
        return false;
    };

    Block s = Block::Zero();
    s.middleCols<4>(0) = init;
    if (cross) s.middleCols<4>(8) = opt.init_mu.value_or(init);

    Propagation out;
    out.fm.lambda = lambda;
    const cplx det0 = init.determinant();
    cplx det_mu0 = cross ? Mat4(s.middleCols<4>(8)).determinant() : cplx(0.0);
    if (cross) out.partner = FundamentalMatrix{opt.mu, {}, {}, 0.0};

    auto record = [&](double x) {
        out.fm.at.push_back(x);
        out.fm.values.push_back(s.middleCols<4>(0));
        if (opt.want_dlambda) out.dvalues.push_back(s.middleCols<4>(4));
        if (cross) {
            out.partner->at.push_back(x);
            out.partner->values.push_back(s.middleCols<4>(8));
        }
    };
    auto track_det = [&]() {
        out.fm.det_drift = std::max(out.fm.det_drift, std::abs(detail::det_ld(s.middleCols<4>(0)) - det0));
        if (cross)
            out.partner->det_drift =
                std::max(out.partner->det_drift, std::abs(detail::det_ld(s.middleCols<4>(8)) - det_mu0));
    };
    record(nodes.front());

    const double rtol = pr.tol().ode_rel, atol = pr.tol().ode_abs;
    const double sgn = dir == Direction::forward ? 1.0 : -1.0;
    double h = std::min(0.05, 0.5 / (1.0 + std::pow(std::abs(lambda), 0.25)));
    if (cross) h = std::min(h, 0.5 / (1.0 + std::pow(std::abs(opt.mu), 0.25)));
    double err_old = 1e-4;

    Block k1, k2, k3, k4, k5, k6, k7, y1, tmp;
    for (std::size_t iv = 0; iv + 1 < nodes.size(); ++iv) {
        const double xa = nodes[iv], xb = nodes[iv + 1];
        const double mid = 0.5 * (xa + xb);
        const std::size_t sp = pr.p().segment_index(mid), sq = pr.q().segment_index(mid);
        auto coef = [&](double x, cplx& p, cplx& q) {
            p = pr.p().eval_in(sp, x);
            q = pr.q().eval_in(sq, x);
        };
        double x = xa;
        cplx p, q;
        coef(x, p, q);
        rhs(p, q, s, k1);
        bool last = false;
        while (!last) {
            double remaining = std::abs(xb - x);
            if (h >= remaining * (1.0 - 1e-12)) {
                h = remaining;
                last = true;
            }
            if (h < 1e-14 * (1.0 + std::abs(x))) throw PropagationError("step-size underflow", x);
            const double hs = sgn * h;
            coef(x + T::c2 * hs, p, q);
            tmp = s + hs * (T::a21 * k1);
            rhs(p, q, tmp, k2);
            coef(x + T::c3 * hs, p, q);
            tmp = s + hs * (T::a31 * k1 + T::a32 * k2);
            rhs(p, q, tmp, k3);
            coef(x + T::c4 * hs, p, q);
            tmp = s + hs * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
            rhs(p, q, tmp, k4);
            coef(x + T::c5 * hs, p, q);
            tmp = s + hs * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
            rhs(p, q, tmp, k5);
            const double xn = last ? xb : x + hs;
            coef(xn, p, q);
            tmp = s + hs * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
            rhs(p, q, tmp, k6);
            y1 = s + hs * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
            rhs(p, q, y1, k7);
            Block e = hs * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);
            double err = detail::err_norm(e, s, y1, rtol, atol, mask);
            if (!std::isfinite(err)) throw PropagationError("non-finite state", x);

            if (err <= 1.0) {
                s = y1;
                k1 = k7;
                x = xn;
                ++out.steps;
                track_det();
                if (opt.record_steps && !last) record(x);
                double fac = std::pow(err, 0.17) / std::pow(err_old, 0.04) / 0.9;
                fac = std::clamp(fac, 0.2, 10.0);
                if (!last) h = h / fac;
                err_old = std::max(err, 1e-4);
            } else {
                ++out.rejected;
                last = false;
                h = h / std::min(10.0, std::pow(err, 0.2) / 0.9);
            }
            if (out.steps > 2000000) throw PropagationError("step budget exhausted", x);
        }
        if (is_output(xb) || opt.record_steps) record(xb);
    }

    out.quadrature = sgn * Mat4(s.middleCols<4>(12));
    return out;
}

/// C(x, lambda): forward from x=0 with U_s(C_k) = delta_sk.
inline Propagation fundamental_C(const Problem& pr, cplx lambda, PropagateOptions opt = {}) {
    return propagate(pr, lambda, Direction::forward, boundary_form_inverse(pr.a(), pr.b(), pr.c()), opt);
}

/// S(x, lambda): backward from x=1 with V_s(S_k) = delta_sk.
inline Propagation fundamental_S(const Problem& pr, cplx lambda, PropagateOptions opt = {}) {
    return propagate(pr, lambda, Direction::backward, Mat4::Identity(), opt);
}

} // namespace qspec
