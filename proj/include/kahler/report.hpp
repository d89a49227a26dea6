#ifndef KAHLER_REPORT_HPP
#define KAHLER_REPORT_HPP

// JSON and text rendering of check reports. Complex numbers are [re, im] pairs.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kahler/checks.hpp"

namespace kahler {

using ordered_json = nlohmann::ordered_json;

inline ordered_json complex_vector_json(const Eigen::VectorXcd& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back({v(k).real(), v(k).imag()});
    return out;
}

inline ordered_json to_json(const CheckReport& r) {
    ordered_json worst = ordered_json::array();
    for (const auto& w : r.worst_cases) {
        ordered_json frame = ordered_json::array();
        for (const auto& v : w.frame) frame.push_back(complex_vector_json(v));
        worst.push_back({{"point", complex_vector_json(w.point)}, {"frame", frame}, {"residual", w.residual}});
    }
    return {{"manifold", r.manifold},
            {"check", r.check},
            {"seed", r.seed},
            {"points", r.points},
            {"samples", r.samples},
            {"tolerance", r.tolerance},
            {"max_residual", r.max_residual},
            {"mean_residual", r.mean_residual},
            {"verdict", r.pass ? "pass" : "fail"},
            {"worst_cases", worst},
            {"timestamp", r.timestamp}};
}

inline ordered_json to_json(const std::vector<CheckReport>& reports) {
    ordered_json out = ordered_json::array();
    for (const auto& r : reports) out.push_back(to_json(r));
    return out;
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

/// One line per report, e.g. "bochner     pass  max 3.1e-16  mean 4.2e-17  (tol 1e-08)".
inline std::string format_report(const CheckReport& r) {
    std::ostringstream s;
    s.precision(3);
    s << r.check;
    for (std::size_t k = r.check.size(); k < 18; ++k) s << ' ';
    s << (r.pass ? "pass" : "FAIL") << "  max " << std::scientific << r.max_residual << "  mean " << r.mean_residual
      << "  (tol " << r.tolerance << ")";
    if (!r.note.empty()) s << "  " << r.note;
    return s.str();
}

}  // namespace kahler

#endif  // KAHLER_REPORT_HPP
