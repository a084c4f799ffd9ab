#pragma once

#include "qspec/weights.hpp"

#include <cstdlib>
#include <future>
#include <map>
#include <thread>

namespace qspec {

/// (Delta_32(lambda_n), Delta_42(lambda_n)) = dDelta_22(lambda_n) (gamma_n^2, xi_n gamma_n).
/// `delta33_rel` is |Delta_33(lambda_n)| over its scale; the relation needs it nonzero.
inline std::pair<cplx, cplx> mclaughlin_to_barcilon_values(const SpectralPoint& p, cplx ddelta22,
                                                           double delta33_rel = 1.0) {
    if (delta33_rel < kPoleFloor) throw DataError("Delta_33 vanishes at lambda_n; the relation does not apply");
    if (!p.simple) throw DataError("eigenvalue is not simple");
    return {ddelta22 * p.gamma * p.gamma, ddelta22 * p.xi * p.gamma};
}

/// gamma_n^2 back from Delta_32(lambda_n).
inline cplx gamma_squared_from_barcilon(cplx d32, cplx ddelta22) { return d32 / ddelta22; }

/// |lambda_n| ~ c n^alpha, fitted by least squares on log-log over the last
/// half (at most 10) of the sequence.
struct GrowthFit {
    double c = 0.0;
    double alpha = 0.0;
    bool ok = false;
};

inline GrowthFit fit_growth(const std::vector<cplx>& zs) {
    GrowthFit g;
    const int n = static_cast<int>(zs.size());
    if (n < 2) return g;
    const int m = std::clamp(n / 2, 2, 10);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = n - m; i < n; ++i) {
        const double x = std::log(double(i + 1)), y = std::log(std::abs(zs[i]));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    if (den <= 0) return g;
    g.alpha = (m * sxy - sx * sy) / den;
    g.c = std::exp((sy - g.alpha * sx) / m);
    g.ok = std::isfinite(g.alpha) && g.alpha > 1.0 && g.c > 0;
    return g;
}

namespace detail {

// Bound on sum_{n>N} 1 / (c n^alpha - |lambda|), doubled for the fit's slack.
inline double tail_sum(const GrowthFit& g, int n_terms, double lam_abs) {
    if (!g.ok || n_terms == 0) return std::numeric_limits<double>::infinity();
    const double next = g.c * std::pow(double(n_terms + 1), g.alpha);
    if (next <= lam_abs) return std::numeric_limits<double>::infinity();
    const double integral = std::pow(double(n_terms), 1.0 - g.alpha) / (g.c * (g.alpha - 1.0));
    return 2.0 * integral / (1.0 - lam_abs / next);
}

} // namespace detail

struct SeriesValue {
    cplx value = 0.0;
    double bound = 0.0; // absolute for series, relative for products
    int terms = 0;
};

/// Mittag-Leffler partial sum  sum_{n<=N} beta_n / (lambda - lambda_n).
inline SeriesValue reconstruct_m32(const std::vector<cplx>& lambdas, const std::vector<cplx>& betas, cplx lambda,
                                   int terms = -1, double root_tol = 1e-12) {
    if (lambdas.empty() || lambdas.size() != betas.size()) throw DataError("insufficient data");
    const int n = terms < 0 ? static_cast<int>(lambdas.size()) : std::min<int>(terms, lambdas.size());
    SeriesValue r;
    r.terms = n;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lambda - lambdas[i]) <= root_tol * (1.0 + std::abs(lambdas[i])))
            throw DataError("evaluation at pole");
        r.value += betas[i] / (lambda - lambdas[i]);
    }
    double bmax = 0.0;
    for (int i = n / 2; i < n; ++i) bmax = std::max(bmax, std::abs(betas[i]));
    std::vector<cplx> used(lambdas.begin(), lambdas.begin() + n);
    r.bound = bmax * detail::tail_sum(fit_growth(used), n, std::abs(lambda));
    return r;
}

/// c prod (1 - lambda/lambda_n), normalised so the value at `anchor_point` is
/// `anchor_value`. Order below one is assumed, so no exponential factors.
inline SeriesValue reconstruct_delta_hadamard(const std::vector<cplx>& zeros, cplx anchor_value, cplx lambda,
                                              cplx anchor_point = 0.0, double root_tol = 1e-12) {
    SeriesValue r;
    r.terms = static_cast<int>(zeros.size());
    if (zeros.empty()) {
        r.value = anchor_value;
        r.bound = std::numeric_limits<double>::infinity();
        return r;
    }
    for (cplx z : zeros)
        if (std::abs(z - anchor_point) <= root_tol * (1.0 + std::abs(z)))
            throw DataError("a zero coincides with the anchor point; choose another anchor");
    cplx v = anchor_value;
    for (cplx z : zeros) v *= (z - lambda) / (z - anchor_point);
    r.value = v;
    if (lambda == anchor_point) {
        r.value = anchor_value;
        r.bound = 0.0;
        return r;
    }
    // |log prod_{n>N}| <= sum |lambda - a| / |lambda_n - lambda|
    const double t = std::abs(lambda - anchor_point) *
                     detail::tail_sum(fit_growth(zeros), r.terms, std::max(std::abs(lambda), std::abs(anchor_point)));
    r.bound = std::isfinite(t) ? std::expm1(t) : t;
    return r;
}

struct BarcilonEquivPoint {
    cplx lambda = 0.0;
    SeriesValue d32, d42;
};

/// Delta_32, Delta_42 by truncated products over s13 and s23, anchored with
/// their values at `anchor_point`, evaluated on s12.
inline std::vector<BarcilonEquivPoint> barcilon_equiv_data(const BarcilonData& b, cplx anchor32, cplx anchor42,
                                                           cplx anchor_point = 0.0, int count = -1) {
    if (b.s12.empty() || b.s13.empty() || b.s23.empty()) throw DataError("insufficient data");
    const auto& z13 = b.s13;
    const auto& z23 = b.s23;
    std::vector<BarcilonEquivPoint> out;
    const int n = count < 0 ? static_cast<int>(b.s12.size()) : std::min<int>(count, b.s12.size());
    for (int i = 0; i < n; ++i) {
        BarcilonEquivPoint p;
        p.lambda = b.s12[i];
        p.d32 = reconstruct_delta_hadamard(z13, anchor32, p.lambda, anchor_point);
        p.d42 = reconstruct_delta_hadamard(z23, anchor42, p.lambda, anchor_point);
        out.push_back(p);
    }
    return out;
}

struct Case2Alpha {
    cplx alpha = 0.0;
    bool consistent = false; // alpha above the floor, as the case requires
};

/// alpha_n = -(gamma_n dDelta_43(lambda_n) + xi_n dDelta_33(lambda_n)).
inline Case2Alpha case2_alpha(const SpectralPoint& p, cplx ddelta43, cplx ddelta33, double floor = 1e-10) {
    Case2Alpha a;
    a.alpha = -(p.gamma * ddelta43 + p.xi * ddelta33);
    a.consistent = std::abs(a.alpha) > floor * (std::abs(p.gamma * ddelta43) + std::abs(p.xi * ddelta33) + 1e-300);
    return a;
}

enum class TwinKind { mclaughlin, barcilon, weyl };

inline TwinKind twin_kind_from(const std::string& s) {
    if (s == "mclaughlin") return TwinKind::mclaughlin;
    if (s == "barcilon") return TwinKind::barcilon;
    if (s == "weyl") return TwinKind::weyl;
    throw ValidationError("unknown data kind '" + s + "'");
}

struct TwinEntry {
    int index = 0;
    std::map<std::string, double> distances;
};

struct TwinReport {
    TwinKind kind = TwinKind::mclaughlin;
    std::vector<TwinEntry> entries;
    double max_distance = 0.0;
    double p_identity_deviation = 0.0; // max over the grid of |P(x, lambda) - I|
    std::vector<double> grid_x;
    std::vector<cplx> grid_lambda;
};

namespace detail {

inline int worker_count() {
    if (const char* s = std::getenv("QS_THREADS")) {
        const int n = std::atoi(s);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

// Runs a and b concurrently when more than one worker is allowed.
template <class F>
auto run_pair(F&& f, const Problem& a, const Problem& b) {
    if (worker_count() > 1) {
        auto fa = std::async(std::launch::async, [&] { return f(a); });
        auto rb = f(b);
        return std::make_pair(fa.get(), std::move(rb));
    }
    auto ra = f(a);
    auto rb = f(b);
    return std::make_pair(std::move(ra), std::move(rb));
}

inline std::vector<cplx> twin_lambda_grid() {
    std::vector<cplx> g;
    for (int i = 0; i < 10; ++i) g.emplace_back(-40.0 + 11.0 * i, 3.0 + 0.5 * i);
    return g;
}

} // namespace detail

/// Per-index distances between the data of two problems, plus the matrix of
/// spectral mappings P = Phi Phi~^{-1} on a 10 x 10 (x, lambda) grid.
inline TwinReport twin_comparison(const Problem& a, const Problem& b, TwinKind kind, int count = 5) {
    TwinReport rep;
    rep.kind = kind;
    auto add = [&](int i, const std::string& name, double d) {
        if (static_cast<int>(rep.entries.size()) <= i) rep.entries.resize(i + 1);
        rep.entries[i].index = i + 1;
        rep.entries[i].distances[name] = d;
        rep.max_distance = std::max(rep.max_distance, d);
    };
    try {
        if (kind == TwinKind::mclaughlin) {
            auto data = detail::run_pair(
                [&](const Problem& p) {
                    return weight_numbers(p, first_zeros(p, 2, 2, count), WeightNumberOptions{false, 64, 0.0, 1e-6});
                },
                a, b);
            for (int i = 0; i < count; ++i) {
                const auto &x = data.first[i], &y = data.second[i];
                add(i, "lambda", std::abs(x.lambda - y.lambda));
                add(i, "gamma", std::abs(x.gamma - y.gamma));
                add(i, "xi", std::abs(x.xi - y.xi));
            }
        } else if (kind == TwinKind::barcilon) {
            auto data = detail::run_pair([&](const Problem& p) { return three_spectra(p, count); }, a, b);
            for (int i = 0; i < count; ++i) {
                add(i, "s12", std::abs(data.first.s12[i] - data.second.s12[i]));
                add(i, "s13", std::abs(data.first.s13[i] - data.second.s13[i]));
                add(i, "s23", std::abs(data.first.s23[i] - data.second.s23[i]));
            }
        } else {
            const auto grid = detail::twin_lambda_grid();
            auto data = detail::run_pair(
                [&](const Problem& p) {
                    std::vector<Mat4> ms;
                    for (cplx l : grid) ms.push_back(weyl_matrix(p, l).m);
                    return ms;
                },
                a, b);
            for (std::size_t i = 0; i < grid.size(); ++i)
                add(static_cast<int>(i), "m", max_abs(Mat4(data.first[i] - data.second[i])));
        }
    } catch (const Error& e) {
        throw Error("data", std::string("data extraction failed: ") + e.what());
    }

    for (int i = 0; i < 10; ++i) rep.grid_x.push_back((i + 0.5) / 10.0);
    rep.grid_lambda = detail::twin_lambda_grid();
    for (cplx l : rep.grid_lambda) {
        auto pa = phi(a, l, rep.grid_x), pb = phi(b, l, rep.grid_x);
        for (std::size_t i = 0; i < pa.size(); ++i) {
            Mat4 p = pa[i] * pb[i].inverse();
            rep.p_identity_deviation = std::max(rep.p_identity_deviation, max_abs(Mat4(p - Mat4::Identity())));
        }
    }
    return rep;
}

} // namespace qspec
