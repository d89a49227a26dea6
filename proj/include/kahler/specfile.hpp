#ifndef KAHLER_SPECFILE_HPP
#define KAHLER_SPECFILE_HPP

// Text spec files, one `key = value` per line, `#` starts a comment.
//
// Manifold:   dimension = 2
//             potential = "log(1 + z1*zb1 + z2*zb2)"
//             domain = ball 1            (or: polydisc r1 ... rm)
//
// Immersion:  ambient = builtin:flat:2   (uri or manifold spec path)
//             parameters = 2
//             component1 = "u1 + i*u2"
//             component2 = "0"
//             domain = box lo1 hi1 ... lon hin

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "kahler/models.hpp"

namespace kahler {

class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open spec file '" + path + "'");
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        bool quoted = false;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') quoted = !quoted;
            if (line[k] == '#' && !quoted) {
                line.resize(k);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw SpecError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        if (key.empty()) throw SpecError(path + ":" + std::to_string(lineno) + ": empty key");
        if (!out.emplace(key, value).second)
            throw SpecError(path + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    return out;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key,
                                      const std::string& path) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw SpecError(path + ": missing key '" + key + "'");
    return it->second;
}

inline std::vector<double> read_numbers(std::istringstream& in, const std::string& path) {
    std::vector<double> out;
    std::string word;
    while (in >> word) {
        const auto v = to_number(word);
        if (!v) throw SpecError(path + ": bad number '" + word + "'");
        out.push_back(*v);
    }
    return out;
}

inline int read_count(const std::string& text, const std::string& key, const std::string& path) {
    const auto v = to_number(trim(text));
    if (!v || *v < 1 || *v != static_cast<int>(*v)) throw SpecError(path + ": '" + key + "' must be a positive integer");
    return static_cast<int>(*v);
}

}  // namespace detail

inline bool is_builtin_uri(const std::string& source) { return source.rfind("builtin:", 0) == 0; }

inline KahlerManifold load_manifold_file(const std::string& path) {
    const auto kv = detail::read_key_values(path);
    const int m = detail::read_count(detail::require_key(kv, "dimension", path), "dimension", path);
    Expr potential;
    try {
        potential = parse_expression(detail::require_key(kv, "potential", path), m);
    } catch (const ParseError& e) {
        throw SpecError(path + ": potential: " + e.what());
    }
    std::istringstream dom(detail::require_key(kv, "domain", path));
    std::string shape;
    dom >> shape;
    const std::vector<double> radii = detail::read_numbers(dom, path);
    for (double r : radii)
        if (!(r > 0.0)) throw SpecError(path + ": domain radii must be positive");
    if (shape == "ball" && radii.size() == 1)
        return KahlerManifold(m, potential, ChartDomain::ball(radii[0]), path);
    if (shape == "polydisc" && radii.size() == static_cast<std::size_t>(m))
        return KahlerManifold(m, potential, ChartDomain::polydisc(radii), path);
    throw SpecError(path + ": domain must be 'ball <r>' or 'polydisc <r1> ... <rm>'");
}

/// Builtin uri or manifold spec file.
inline KahlerManifold load_manifold(const std::string& source) {
    return is_builtin_uri(source) ? build_model(source) : load_manifold_file(source);
}

/// Immersion spec file. `fallback_ambient` is used when the file has no `ambient` key.
inline Immersion load_immersion_file(const std::string& path, const std::string& fallback_ambient = {}) {
    const auto kv = detail::read_key_values(path);
    std::string ambient_source = fallback_ambient;
    if (auto it = kv.find("ambient"); it != kv.end()) ambient_source = it->second;
    if (ambient_source.empty()) throw SpecError(path + ": missing key 'ambient'");
    auto ambient = std::make_shared<const KahlerManifold>(load_manifold(ambient_source));
    const int n = detail::read_count(detail::require_key(kv, "parameters", path), "parameters", path);
    std::vector<Expr> f;
    for (int k = 1; k <= ambient->dimension(); ++k) {
        const std::string key = "component" + std::to_string(k);
        try {
            f.push_back(parse_expression(detail::require_key(kv, key, path), n, {VarKind::u}));
        } catch (const ParseError& e) {
            throw SpecError(path + ": " + key + ": " + e.what());
        }
    }
    std::istringstream dom(detail::require_key(kv, "domain", path));
    std::string shape;
    dom >> shape;
    const std::vector<double> bounds = detail::read_numbers(dom, path);
    if (shape != "box" || bounds.size() != 2 * static_cast<std::size_t>(n))
        throw SpecError(path + ": domain must be 'box <lo1> <hi1> ... <lo" + std::to_string(n) + "> <hi" +
                        std::to_string(n) + ">'");
    ParameterBox box;
    for (int a = 0; a < n; ++a) {
        box.lo.push_back(bounds[2 * static_cast<std::size_t>(a)]);
        box.hi.push_back(bounds[2 * static_cast<std::size_t>(a) + 1]);
        if (!(box.lo.back() < box.hi.back())) throw SpecError(path + ": empty parameter interval");
    }
    return Immersion(std::move(ambient), n, std::move(f), std::move(box), path);
}

/// "builtin:immersion:<name>" or an immersion spec file.
inline Immersion load_immersion(const std::string& source, const std::string& fallback_ambient = {}) {
    if (is_builtin_uri(source)) return builtin_immersion(source).immersion;
    return load_immersion_file(source, fallback_ambient);
}

}  // namespace kahler

#endif  // KAHLER_SPECFILE_HPP
