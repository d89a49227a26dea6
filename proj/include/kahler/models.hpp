#ifndef KAHLER_MODELS_HPP
#define KAHLER_MODELS_HPP

// Builtin model manifolds, addressed by URI:
//
//   builtin:flat:<m>                   K = Σ z_k zb_k
//   builtin:fs:<m>[:<s>]               K = (1/s) log(1 + Σ z_k zb_k)
//   builtin:chyp:<m>[:<s>]             K = -(1/s) log(1 - Σ z_k zb_k), ball of radius 0.9
//   builtin:product:<f1>:<f2>          sum of two factor potentials on disjoint coordinate blocks,
//                                      each factor written <kind>:<m>[:<s>]
//
// Product factors without an explicit scale get scale 1 (first) and 2 (second).

#include <charconv>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "kahler/expr.hpp"
#include "kahler/geometry.hpp"
#include "kahler/submanifold.hpp"

namespace kahler {

class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Names of the manifold-level checks, in suite order.
inline const std::vector<std::string>& manifold_checks() {
    static const std::vector<std::string> names = {"bochner", "lemma",         "basis-sum",      "einstein",
                                                   "ricci-offdiag", "chsc", "reconstruct-2-3"};
    return names;
}

/// Names of the immersion-level checks.
inline const std::vector<std::string>& immersion_checks() {
    static const std::vector<std::string> names = {"codazzi-general", "codazzi-umbilical", "umbilical",
                                                   "parallel-h"};
    return names;
}

struct ModelDescriptor {
    std::string uri;
    std::string kind;           // flat, fs, chyp or product
    std::vector<std::string> factor_kinds;  // one entry unless product
    std::vector<int> dims;
    std::vector<double> scales;
    std::map<std::string, bool> expected_pass;  // check name -> verdict at default tolerance
    bool einstein = false;
    bool bochner_flat = false;
    std::optional<int> hsc_sign;  // sign of the constant HSC; empty when HSC is not constant

    int dimension() const {
        int m = 0;
        for (int d : dims) m += d;
        return m;
    }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

inline std::optional<double> to_number(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline int to_dimension(const std::string& s, const std::string& uri) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ModelError("bad dimension '" + s + "' in " + uri);
    if (v < 1) throw ModelError("dimension must be at least 1 in " + uri);
    return v;
}

struct Factor {
    std::string kind;
    int m = 1;
    double scale = 1.0;
};

// Σ_{k=offset+1}^{offset+m} z_k zb_k
inline Expr norm_squared(int offset, int m) {
    Expr s = constant(0.0);
    for (int k = offset + 1; k <= offset + m; ++k)
        s = s + variable(VarKind::z, k) * variable(VarKind::zb, k);
    return s;
}

inline Expr factor_potential(const Factor& f, int offset) {
    const Expr r2 = norm_squared(offset, f.m);
    if (f.kind == "flat") return f.scale == 1.0 ? r2 : constant(f.scale) * r2;
    if (f.kind == "fs") return constant(1.0 / f.scale) * log(constant(1.0) + r2);
    if (f.kind == "chyp") return constant(-1.0 / f.scale) * log(constant(1.0) - r2);
    throw ModelError("unknown model kind '" + f.kind + "'");
}

inline ModelDescriptor parse_model_uri(const std::string& uri) {
    const auto parts = split(uri, ':');
    if (parts.size() < 3 || parts[0] != "builtin") throw ModelError("unknown model uri '" + uri + "'");
    ModelDescriptor d;
    d.uri = uri;
    d.kind = parts[1];
    auto read_factor = [&](std::size_t& pos, double default_scale) {
        Factor f;
        if (pos + 1 >= parts.size()) throw ModelError("incomplete factor in " + uri);
        f.kind = parts[pos];
        if (f.kind != "flat" && f.kind != "fs" && f.kind != "chyp")
            throw ModelError("unknown model kind '" + f.kind + "' in " + uri);
        f.m = to_dimension(parts[pos + 1], uri);
        pos += 2;
        f.scale = default_scale;
        if (pos < parts.size()) {
            if (auto s = to_number(parts[pos])) {
                f.scale = *s;
                ++pos;
            }
        }
        if (!(f.scale > 0.0)) throw ModelError("scale must be positive in " + uri);
        return f;
    };
    std::vector<Factor> factors;
    std::size_t pos = 1;
    if (d.kind == "product") {
        pos = 2;
        factors.push_back(read_factor(pos, 1.0));
        factors.push_back(read_factor(pos, 2.0));
    } else {
        factors.push_back(read_factor(pos, 1.0));
    }
    if (pos != parts.size()) throw ModelError("trailing fields in " + uri);
    for (const auto& f : factors) {
        d.factor_kinds.push_back(f.kind);
        d.dims.push_back(f.m);
        d.scales.push_back(f.scale);
    }

    // Expectations.
    const bool single = factors.size() == 1;
    d.bochner_flat = single;
    d.einstein = single;
    if (single) {
        const std::string& k = factors[0].kind;
        d.hsc_sign = k == "flat" ? 0 : k == "fs" ? 1 : -1;
    }
    for (const auto& name : manifold_checks()) d.expected_pass[name] = single;
    if (!single) {
        // A product of two flat factors is still flat.
        bool all_flat = true;
        for (const auto& f : factors) all_flat = all_flat && f.kind == "flat";
        if (all_flat) {
            d.bochner_flat = d.einstein = true;
            d.hsc_sign = 0;
            for (auto& [name, pass] : d.expected_pass) pass = true;
        }
    }
    return d;
}

}  // namespace detail

inline ModelDescriptor describe_model(const std::string& uri) { return detail::parse_model_uri(uri); }

inline KahlerManifold build_model(const std::string& uri) {
    const ModelDescriptor d = detail::parse_model_uri(uri);
    Expr potential = constant(0.0);
    int offset = 0;
    bool has_chyp = false;
    for (std::size_t f = 0; f < d.dims.size(); ++f) {
        const detail::Factor factor{d.factor_kinds[f], d.dims[f], d.scales[f]};
        has_chyp = has_chyp || factor.kind == "chyp";
        potential = potential + detail::factor_potential(factor, offset);
        offset += factor.m;
    }
    return KahlerManifold(offset, potential, ChartDomain::ball(has_chyp ? 0.9 : 1.0), uri);
}


// ---------------------------------------------------------------------------
// Immersion fixtures

struct ImmersionExpectations {
    bool geodesic = false;        // α ≡ 0
    bool umbilic = false;         // α = g H
    bool parallel_h = false;      // D H ≡ 0
    bool antiholomorphic = false; // g(T_a, J T_b) = 0
    std::optional<double> mean_curvature_norm;
    std::map<std::string, bool> expected_pass;  // immersion check name -> verdict
};

struct ImmersionFixture {
    std::string name;
    Immersion immersion;
    ImmersionExpectations expect;
};

namespace detail {

inline std::vector<Expr> parse_components(const std::vector<std::string>& texts, int parameters) {
    std::vector<Expr> out;
    for (const auto& t : texts) out.push_back(parse_expression(t, parameters, {VarKind::u}));
    return out;
}

inline ImmersionExpectations expectations(bool geodesic, bool umbilic, bool parallel_h, bool antiholomorphic) {
    ImmersionExpectations e;
    e.geodesic = geodesic;
    e.umbilic = umbilic;
    e.parallel_h = parallel_h;
    e.antiholomorphic = antiholomorphic;
    e.expected_pass = {{"codazzi-general", true},
                       {"codazzi-umbilical", umbilic},
                       {"umbilical", umbilic},
                       {"parallel-h", parallel_h}};
    return e;
}

inline std::shared_ptr<const KahlerManifold> shared_model(const std::string& uri) {
    return std::make_shared<const KahlerManifold>(build_model(uri));
}

}  // namespace detail

/// Round 2-sphere of intrinsic radius r in the real 3-plane (Re z1, Im z1, Re z2) of flat ℂ².
/// The flat real metric is twice the Euclidean one, so the coordinate radius is r/√2.
inline Immersion sphere_immersion(double r) {
    if (!(r > 0.0)) throw ModelError("sphere radius must be positive");
    const std::string rho = detail::format_double(r / std::sqrt(2.0));
    const std::string sin1 = "(-0.5*i*(exp(i*u1) - exp(-i*u1)))";
    const std::string cos1 = "(0.5*(exp(i*u1) + exp(-i*u1)))";
    return Immersion(detail::shared_model("builtin:flat:2"), 2,
                     detail::parse_components({rho + "*" + sin1 + "*exp(i*u2)", rho + "*" + cos1}, 2),
                     ParameterBox{{0.4, 0.0}, {2.7, 6.0}}, "sphere:" + detail::format_double(r));
}

/// Builtin immersions with their known behavior. Parameter boxes keep every
/// image inside the ambient chart and away from parametrization singularities.
inline std::vector<ImmersionFixture> builtin_immersions() {
    using detail::expectations;
    using detail::parse_components;
    using detail::shared_model;
    std::vector<ImmersionFixture> out;

    out.push_back({"linear", Immersion(shared_model("builtin:flat:3"), 4,
                                       parse_components({"u1 + i*u2", "u3 + i*u4", "0"}, 4),
                                       ParameterBox{{-0.4, -0.4, -0.4, -0.4}, {0.4, 0.4, 0.4, 0.4}}, "linear"),
                   expectations(true, true, true, false)});
    out.back().expect.mean_curvature_norm = 0.0;

    out.push_back({"sphere", sphere_immersion(1.0), expectations(false, true, true, false)});
    out.back().expect.mean_curvature_norm = 1.0;

    out.push_back({"ellipsoid", Immersion(shared_model("builtin:flat:2"), 2,
                                          parse_components({"0.6*(-0.5*i*(exp(i*u1) - exp(-i*u1)))*0.5*(exp(i*u2) + exp(-i*u2))"
                                                            " + 0.4*i*(-0.5*i*(exp(i*u1) - exp(-i*u1)))*(-0.5*i*(exp(i*u2) - exp(-i*u2)))",
                                                            "0.25*0.5*(exp(i*u1) + exp(-i*u1))"},
                                                           2),
                                          ParameterBox{{0.4, 0.0}, {2.7, 6.0}}, "ellipsoid"),
                   expectations(false, false, false, false)});

    out.push_back({"cylinder", Immersion(shared_model("builtin:flat:2"), 2,
                                         parse_components({"0.5*exp(i*u1)", "u2"}, 2),
                                         ParameterBox{{0.0, -0.4}, {6.0, 0.4}}, "cylinder"),
                   expectations(false, false, true, false)});

    out.push_back({"cp1-in-cp2", Immersion(shared_model("builtin:fs:2"), 2, parse_components({"u1 + i*u2", "0"}, 2),
                                           ParameterBox{{-0.5, -0.5}, {0.5, 0.5}}, "cp1-in-cp2"),
                   expectations(true, true, true, false)});
    out.back().expect.mean_curvature_norm = 0.0;

    out.push_back({"real-slice", Immersion(shared_model("builtin:flat:2"), 2, parse_components({"u1", "u2"}, 2),
                                           ParameterBox{{-0.5, -0.5}, {0.5, 0.5}}, "real-slice"),
                   expectations(true, true, true, true)});
    out.back().expect.mean_curvature_norm = 0.0;

    out.push_back({"rp2-in-cp2", Immersion(shared_model("builtin:fs:2"), 2, parse_components({"u1", "u2"}, 2),
                                           ParameterBox{{-0.5, -0.5}, {0.5, 0.5}}, "rp2-in-cp2"),
                   expectations(true, true, true, true)});
    out.back().expect.mean_curvature_norm = 0.0;

    out.push_back({"surface-in-cp2",
                   Immersion(shared_model("builtin:fs:2"), 2,
                             parse_components({"u1 + 0.3*u2^2 + 0.2*i*u1*u2", "u2 + 0.25*i*u1^2"}, 2),
                             ParameterBox{{-0.4, -0.4}, {0.4, 0.4}}, "surface-in-cp2"),
                   expectations(false, false, false, false)});
    return out;
}

/// Looks up a builtin immersion by name ("builtin:immersion:<name>" or the bare name).
inline ImmersionFixture builtin_immersion(const std::string& name) {
    std::string key = name;
    const std::string prefix = "builtin:immersion:";
    if (key.rfind(prefix, 0) == 0) key = key.substr(prefix.size());
    for (auto& f : builtin_immersions())
        if (f.name == key) return f;
    throw ModelError("unknown builtin immersion '" + name + "'");
}

}  // namespace kahler

#endif  // KAHLER_MODELS_HPP
