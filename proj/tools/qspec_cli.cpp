#include "qspec/json_io.hpp"
#include "qspec/verify.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <iostream>

using namespace qspec;

namespace {

struct Common {
    std::string problem;
    std::string output;
    std::string format = "json";
    double ode_rel = 0, ode_abs = 0, root_tol = 0;
    int nodes = 0;
    unsigned long seed = 1;
};

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

cplx parse_complex(const std::string& s) {
    const auto comma = s.find(',');
    try {
        if (comma == std::string::npos) return {std::stod(s), 0.0};
        return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
    } catch (const std::exception&) {
        throw UsageError("cannot parse complex value '" + s + "' (expected re or re,im)");
    }
}

std::string num(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

Problem load(const Common& c, const std::string& path) {
    if (path.empty()) throw UsageError("--problem is required");
    auto spec = spec_from_json(read_json_file(path));
    if (c.ode_rel > 0) spec.tolerances.ode_rel = c.ode_rel;
    if (c.ode_abs > 0) spec.tolerances.ode_abs = c.ode_abs;
    if (c.root_tol > 0) spec.tolerances.root_tol = c.root_tol;
    if (c.nodes > 0) spec.tolerances.contour_nodes = c.nodes;
    return validate_problem(spec);
}

void emit(const Common& c, const std::string& text) {
    if (c.output.empty()) {
        std::cout << text << '\n';
        return;
    }
    std::ofstream out(c.output);
    if (!out) throw UsageError("cannot write '" + c.output + "'");
    out << text << '\n';
}

void emit(const Common& c, const json& j) { emit(c, j.dump(2)); }

std::pair<int, int> selector(const std::string& s) {
    if (s.size() != 2 || !std::isdigit(s[0]) || !std::isdigit(s[1])) throw UsageError("selector must be two digits, e.g. 22");
    return {s[0] - '0', s[1] - '0'};
}

json point_json(const SpectralPoint& p) {
    json j{{"lambda", to_json(p.lambda)}, {"gamma", to_json(p.gamma)}, {"xi", to_json(p.xi)}};
    j["beta"] = p.beta ? to_json(*p.beta) : json();
    j["beta_residue"] = p.beta_residue ? to_json(*p.beta_residue) : json();
    j["norm_ok"] = p.norm_ok;
    j["case"] = case_name(p.case_tag);
    return j;
}

std::vector<SpectralPoint> classified(const Problem& pr, int count, bool residue) {
    auto pts = weight_numbers(pr, first_zeros(pr, 2, 2, count), WeightNumberOptions{residue, pr.tol().contour_nodes});
    ProblemWeyl src(pr);
    for (auto& p : pts) p.case_tag = classify_eigenvalue(p, src);
    return pts;
}

json series_json(const SeriesValue& v) { return json{{"value", to_json(v.value)}, {"bound", v.bound}, {"terms", v.terms}}; }

json twin_json(const TwinReport& t) {
    json entries = json::array();
    for (const auto& e : t.entries) {
        json d = json::object();
        for (const auto& [k, v] : e.distances) d[k] = v;
        entries.push_back(json{{"index", e.index}, {"distances", d}});
    }
    return json{{"entries", entries}, {"max_distance", t.max_distance}, {"p_identity_deviation", t.p_identity_deviation}};
}

json roundtrip_json(const Problem& pr, int count) {
    auto pts = classified(pr, count, false);
    json rows = json::array();
    double worst = 0.0;
    for (const auto& p : pts) {
        auto d33 = characteristic_delta(pr, p.lambda, 3, 3, false);
        auto [p32, p42] = mclaughlin_to_barcilon_values(p, p.ddelta22, std::abs(d33.value) / d33.scale);
        const cplx c32 = characteristic_delta(pr, p.lambda, 3, 2, false).value;
        const cplx c42 = characteristic_delta(pr, p.lambda, 4, 2, false).value;
        const double e32 = std::abs(p32 - c32) / std::abs(c32), e42 = std::abs(p42 - c42) / std::abs(c42);
        worst = std::max({worst, e32, e42});
        rows.push_back(json{{"lambda", to_json(p.lambda)},
                            {"predicted_delta32", to_json(p32)},
                            {"direct_delta32", to_json(c32)},
                            {"predicted_delta42", to_json(p42)},
                            {"direct_delta42", to_json(c42)},
                            {"rel_error_32", e32},
                            {"rel_error_42", e42}});
    }
    return json{{"points", rows}, {"max_rel_error", worst}, {"threshold", 1e-5}, {"pass", worst < 1e-5}};
}

int run(int argc, char** argv) {
    CLI::App app{"Spectral data for fourth-order boundary value problems"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App* s, bool problem = true) {
        if (problem) s->add_option("--problem", c.problem, "problem JSON file");
        s->add_option("--output", c.output, "write the result here instead of stdout");
        s->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--ode-rel", c.ode_rel, "override the ODE relative tolerance");
        s->add_option("--ode-abs", c.ode_abs, "override the ODE absolute tolerance");
        s->add_option("--root-tol", c.root_tol, "override the root tolerance");
        s->add_option("--nodes", c.nodes, "override the contour node count");
        s->add_option("--seed", c.seed, "seed for randomized suites");
    };

    std::string sel = "22", lo, hi, lambda, grid, kind = "m32", file_a, file_b;
    double xmin = -50.0, xmax = 1000.0;
    int count = 5, rt_count = 4;

    auto* spectrum = app.add_subcommand("spectrum", "zeros of Delta_jk");
    add_common(spectrum);
    spectrum->add_option("--selector", sel, "jk");
    spectrum->add_option("--xmin", xmin);
    spectrum->add_option("--xmax", xmax);
    spectrum->add_option("--count", count);
    spectrum->add_option("--lo", lo, "lower-left corner re,im (complex search)");
    spectrum->add_option("--hi", hi, "upper-right corner re,im (complex search)");

    auto* weyl = app.add_subcommand("weyl", "Weyl-Yurko matrix and characteristic functions");
    add_common(weyl);
    weyl->add_option("--lambda", lambda, "re,im");
    weyl->add_option("--lambda-grid", grid, "CSV file with re,im per line");

    auto* mcl = app.add_subcommand("mclaughlin", "eigenvalues and weight numbers");
    add_common(mcl);
    mcl->add_option("--count", count);

    auto* weights = app.add_subcommand("weights", "weight matrix at a pole");
    add_common(weights);
    weights->add_option("--lambda0", lambda, "re,im")->required();

    auto* cls = app.add_subcommand("classify", "case of each eigenvalue");
    add_common(cls);
    cls->add_option("--count", count);

    auto* barc = app.add_subcommand("barcilon", "three spectra");
    add_common(barc);
    barc->add_option("--count", count);

    auto* rec = app.add_subcommand("reconstruct", "series and product reconstructions from computed data");
    add_common(rec);
    rec->add_option("--kind", kind, "m32 or delta")->check(CLI::IsMember({"m32", "delta"}));
    rec->add_option("--selector", sel, "jk for --kind delta");
    rec->add_option("--count", count);
    rec->add_option("--lambda", lambda, "re,im")->required();

    auto* twin = app.add_subcommand("twin", "compare the data of two problems");
    add_common(twin, false);
    twin->add_option("--a", file_a)->required();
    twin->add_option("--b", file_b)->required();
    twin->add_option("--kind", kind)->check(CLI::IsMember({"mclaughlin", "barcilon", "weyl"}));
    twin->add_option("--count", count);

    auto* ver = app.add_subcommand("verify", "identity suite");
    add_common(ver);

    auto* bridge = app.add_subcommand("bridge", "data-level transforms");
    bridge->require_subcommand(1);
    auto* rt = bridge->add_subcommand("roundtrip", "McLaughlin to Barcilon values against direct evaluation");
    add_common(rt);
    rt->add_option("--count", rt_count);
    auto* bt = bridge->add_subcommand("twin", "twin comparison");
    add_common(bt, false);
    bt->add_option("--a", file_a)->required();
    bt->add_option("--b", file_b)->required();
    bt->add_option("--kind", kind)->check(CLI::IsMember({"mclaughlin", "barcilon", "weyl"}));
    bt->add_option("--count", count);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (spectrum->parsed()) {
        auto pr = load(c, c.problem);
        auto [j, k] = selector(sel);
        delta_slot(j, k);
        SpectrumRequest rq;
        rq.j = j;
        rq.k = k;
        rq.max_count = count;
        rq.refine_tol = pr.tol().root_tol;
        std::vector<Zero> zs;
        if (!lo.empty() || !hi.empty()) {
            if (lo.empty() || hi.empty()) throw UsageError("--lo and --hi go together");
            rq.lo = parse_complex(lo);
            rq.hi = parse_complex(hi);
            zs = find_complex_zeros(pr, rq);
        } else {
            rq.xmin = xmin;
            rq.xmax = xmax;
            zs = find_real_zeros(pr, rq);
        }
        json out = json::array();
        for (auto& z : zs)
            out.push_back(json{{"lambda", to_json(z.lambda)}, {"ddelta", to_json(z.ddelta)}, {"simple", simplicity_check(z)}});
        emit(c, out);
    } else if (weyl->parsed()) {
        auto pr = load(c, c.problem);
        std::vector<cplx> pts;
        if (!lambda.empty()) pts.push_back(parse_complex(lambda));
        if (!grid.empty()) {
            std::ifstream in(grid);
            if (!in) throw UsageError("cannot open '" + grid + "'");
            std::string line;
            while (std::getline(in, line))
                if (!line.empty() && line[0] != '#') pts.push_back(parse_complex(line));
        }
        if (pts.empty()) throw UsageError("give --lambda or --lambda-grid");
        if (c.format == "csv") {
            std::string text = "lambda_re,lambda_im";
            for (const char* e : {"m21", "m31", "m41", "m32", "m42", "m43"}) text += std::string(",") + e + "_re," + e + "_im";
            for (auto [j, k] : kDeltaOrder) {
                const std::string n = "delta" + std::to_string(j) + std::to_string(k);
                text += "," + n + "_re," + n + "_im";
            }
            for (cplx l : pts) {
                auto w = weyl_matrix(pr, l);
                text += "\n" + num(l.real()) + "," + num(l.imag());
                for (auto [j, k] : std::array<std::array<int, 2>, 6>{{{2, 1}, {3, 1}, {4, 1}, {3, 2}, {4, 2}, {4, 3}}})
                    text += "," + num(w.m(j - 1, k - 1).real()) + "," + num(w.m(j - 1, k - 1).imag());
                for (auto& d : w.deltas.d) text += "," + num(d.value.real()) + "," + num(d.value.imag());
            }
            emit(c, text);
        } else {
            json out = json::array();
            for (cplx l : pts) {
                auto w = weyl_matrix(pr, l);
                json d = json::object();
                for (auto& v : w.deltas.d) d[std::to_string(v.j) + std::to_string(v.k)] = to_json(v.value);
                out.push_back(json{{"lambda", to_json(l)}, {"m", to_json(w.m)}, {"delta", d}});
            }
            emit(c, out);
        }
    } else if (mcl->parsed()) {
        auto pr = load(c, c.problem);
        json out = json::array();
        for (auto& p : classified(pr, count, true)) out.push_back(point_json(p));
        emit(c, out);
    } else if (weights->parsed()) {
        auto pr = load(c, c.problem);
        const cplx l0 = parse_complex(lambda);
        ProblemWeyl src(pr);
        LaurentOptions lo_opt;
        lo_opt.nodes = pr.tol().contour_nodes;
        auto w = weight_matrix(src, l0, lo_opt);
        SpectralPoint p;
        p.lambda = l0;
        CaseTag tag;
        if (src.delta_rel(2, l0) < kPoleFloor) {
            auto ef = eigenfunction(pr, l0);
            p.gamma = ef.gamma;
            p.xi = ef.xi;
            p.norm_ok = ef.norm_ok;
            tag = classify_eigenvalue(p, src);
        } else if (src.delta_rel(1, l0) < kPoleFloor || src.delta_rel(3, l0) < kPoleFloor) {
            tag = CaseTag::V;
        } else {
            tag = CaseTag::unknown; // regular point
        }
        auto rep = verify_weight_structure(w, p, tag);
        json res = json::array();
        for (auto& ck : rep.checks)
            res.push_back(json{{"name", ck.name}, {"residual", ck.residual}, {"threshold", ck.threshold}, {"pass", ck.pass}});
        emit(c, json{{"lambda0", to_json(l0)},
                     {"m_minus1", to_json(w.m_minus1)},
                     {"m_zero", to_json(w.m_zero)},
                     {"n", to_json(w.n)},
                     {"case", tag == CaseTag::unknown ? "regular" : case_name(tag)},
                     {"contour_radius", w.contour_radius},
                     {"quadrature_nodes", w.quadrature_nodes},
                     {"residuals", res}});
    } else if (cls->parsed()) {
        auto pr = load(c, c.problem);
        json out = json::array();
        for (auto& p : classified(pr, count, false))
            out.push_back(json{{"lambda", to_json(p.lambda)}, {"case", case_name(p.case_tag)}});
        emit(c, out);
    } else if (barc->parsed()) {
        auto pr = load(c, c.problem);
        auto b = three_spectra(pr, count);
        auto list = [](const std::vector<cplx>& v) {
            json a = json::array();
            for (cplx z : v) a.push_back(to_json(z));
            return a;
        };
        emit(c, json{{"s12", list(b.s12)}, {"s13", list(b.s13)}, {"s23", list(b.s23)}});
    } else if (rec->parsed()) {
        auto pr = load(c, c.problem);
        const cplx l = parse_complex(lambda);
        json out;
        if (kind == "m32") {
            std::vector<cplx> ls, bs;
            for (auto& p : weight_numbers(pr, first_zeros(pr, 2, 2, count), WeightNumberOptions{true, pr.tol().contour_nodes})) {
                ls.push_back(p.lambda);
                bs.push_back(*p.beta_residue);
            }
            auto v = reconstruct_m32(ls, bs, l);
            out = json{{"kind", "m32"}, {"reconstructed", series_json(v)}, {"direct", to_json(weyl_matrix(pr, l).m(2, 1))}};
        } else {
            auto [j, k] = selector(sel);
            auto zs = lambdas(first_zeros(pr, j, k, count));
            const cplx anchor = characteristic_delta(pr, 0.0, j, k, false).value;
            auto v = reconstruct_delta_hadamard(zs, anchor, l);
            out = json{{"kind", "delta" + sel},
                       {"reconstructed", series_json(v)},
                       {"direct", to_json(characteristic_delta(pr, l, j, k, false).value)}};
        }
        emit(c, out);
    } else if (twin->parsed() || (bridge->parsed() && bt->parsed())) {
        auto a = load(c, file_a), b = load(c, file_b);
        if (kind == "m32") kind = "mclaughlin";
        emit(c, twin_json(twin_comparison(a, b, twin_kind_from(kind), count)));
    } else if (bridge->parsed() && rt->parsed()) {
        auto pr = load(c, c.problem);
        emit(c, roundtrip_json(pr, rt_count));
    } else if (ver->parsed()) {
        auto pr = load(c, c.problem);
        VerifyOptions vo;
        vo.seed = c.seed;
        auto rep = verify_problem(pr, vo);
        json checks = json::array();
        for (auto& ck : rep.checks)
            checks.push_back(json{{"name", ck.name},
                                  {"max_residual", ck.residual},
                                  {"threshold", ck.threshold},
                                  {"samples", ck.samples},
                                  {"pass", ck.pass}});
        json notes = json::array();
        for (auto& n : rep.notes) notes.push_back(n);
        emit(c, json{{"checks", checks}, {"notes", notes}, {"pass", rep.all_pass()}});
        return rep.all_pass() ? 0 : 1;
    }
    return 0;
}

void report(const std::string& kind, const std::string& msg) {
    std::cerr << json{{"error", {{"kind", kind}, {"message", msg}}}}.dump() << '\n';
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        report("usage", e.what());
        return 2;
    } catch (const Error& e) {
        // bad invocation or bad input file versus failure of the computation itself
        const std::string k = e.kind();
        report(k, e.what());
        return k == "usage" || k == "file" || k == "validation" ? 2 : 1;
    } catch (const std::exception& e) {
        report("internal", e.what());
        return 1;
    }
}
