#pragma once

#include "qspec/problem.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace qspec {

using json = nlohmann::ordered_json;

/// Complex values are stored as [re, im]; plain numbers are accepted on input.
inline json to_json(cplx z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const Mat4& m) {
    json rows = json::array();
    for (int i = 0; i < 4; ++i) {
        json r = json::array();
        for (int j = 0; j < 4; ++j) r.push_back(to_json(m(i, j)));
        rows.push_back(r);
    }
    return rows;
}

inline cplx complex_from_json(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw ValidationError(where + ": expected a number or [re, im]");
}

inline CoefficientField field_from_json(const json& j, const std::string& where) {
    if (j.is_null()) return CoefficientField::zero();
    if (!j.is_object() || !j.contains("kind")) throw ValidationError(where + ": missing \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "zero") return CoefficientField::zero();
    if (kind == "constant") return CoefficientField::constant(complex_from_json(j.at("value"), where + ".value"));
    if (kind == "piecewise_poly") {
        if (!j.contains("segments") || !j.at("segments").is_array())
            throw ValidationError(where + ": \"segments\" must be an array");
        CoefficientField f;
        for (const auto& s : j.at("segments")) {
            Segment seg;
            if (!s.contains("x0") || !s.contains("x1") || !s.contains("coeffs"))
                throw ValidationError(where + ": segment needs x0, x1, coeffs");
            seg.x0 = s.at("x0").get<double>();
            seg.x1 = s.at("x1").get<double>();
            for (const auto& c : s.at("coeffs")) seg.coeffs.push_back(complex_from_json(c, where + ".coeffs"));
            if (seg.coeffs.empty()) throw ValidationError(where + ": empty coefficient list");
            f.segments.push_back(seg);
        }
        if (j.contains("real")) f.declared_real = j.at("real").get<bool>();
        return f;
    }
    if (kind == "samples") {
        std::vector<cplx> v;
        for (const auto& c : j.at("values")) v.push_back(complex_from_json(c, where + ".values"));
        const int interp = j.value("interp", 3);
        return CoefficientField::from_samples(v, interp);
    }
    throw ValidationError(where + ": unknown kind '" + kind + "'");
}

inline json field_to_json(const CoefficientField& f) {
    json segs = json::array();
    for (const auto& s : f.segments) {
        json cs = json::array();
        for (cplx c : s.coeffs) cs.push_back(to_json(c));
        segs.push_back(json{{"x0", s.x0}, {"x1", s.x1}, {"coeffs", cs}});
    }
    return json{{"kind", "piecewise_poly"}, {"segments", segs}};
}

inline ProblemSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("problem file must hold a JSON object");
    try {
        ProblemSpec s;
        s.p = field_from_json(j.contains("p") ? j.at("p") : json(), "p");
        s.q = field_from_json(j.contains("q") ? j.at("q") : json(), "q");
        if (j.contains("a")) s.boundary.a = complex_from_json(j.at("a"), "a");
        if (j.contains("b")) s.boundary.b = complex_from_json(j.at("b"), "b");
        if (j.contains("c")) s.boundary.c = complex_from_json(j.at("c"), "c");
        if (j.contains("tolerances")) {
            const auto& t = j.at("tolerances");
            s.tolerances.ode_rel = t.value("ode_rel", s.tolerances.ode_rel);
            s.tolerances.ode_abs = t.value("ode_abs", s.tolerances.ode_abs);
            s.tolerances.root_tol = t.value("root_tol", s.tolerances.root_tol);
            s.tolerances.contour_nodes = t.value("contour_nodes", s.tolerances.contour_nodes);
        }
        s.self_adjoint_hint = j.value("self_adjoint_hint", false);
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("schema: ") + e.what());
    }
}

inline json spec_to_json(const ProblemSpec& s) {
    return json{{"p", field_to_json(s.p)},
                {"q", field_to_json(s.q)},
                {"a", to_json(s.boundary.a)},
                {"b", to_json(s.boundary.b)},
                {"c", to_json(s.boundary.c)},
                {"tolerances",
                 {{"ode_rel", s.tolerances.ode_rel},
                  {"ode_abs", s.tolerances.ode_abs},
                  {"root_tol", s.tolerances.root_tol},
                  {"contour_nodes", s.tolerances.contour_nodes}}},
                {"self_adjoint_hint", s.self_adjoint_hint}};
}

/// Thrown for files that cannot be opened; the CLI maps it to a usage error.
class FileError : public Error {
public:
    explicit FileError(const std::string& m) : Error("file", m) {}
};

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

inline Problem load_problem(const std::string& path) { return validate_problem(spec_from_json(read_json_file(path))); }

} // namespace qspec
