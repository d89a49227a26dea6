// kahler: run curvature checks on builtin or file-defined Kähler manifolds.
//
//   kahler check bochner --manifold builtin:fs:3 --points 5 --samples 100 --tol 1e-8 --seed 42
//   kahler check umbilical --immersion builtin:immersion:sphere
//   kahler suite --manifold builtin:product:fs:1:fs:2 --seed 7 --json out.json
//   kahler parse --expr "log(1 + z1*zb1)" --dim 1
//
// Exit status: 0 pass, 1 fail, 2 error.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "kahler/checks.hpp"
#include "kahler/report.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

int run_check_command(const kahler::RunConfig& cfg) {
    const kahler::CheckReport report = kahler::run_check(cfg);
    std::cout << (report.manifold.empty() ? cfg.immersion : report.manifold) << "\n";
    if (!cfg.immersion.empty() && kahler::RunConfig::is_immersion_check(cfg.check))
        std::cout << "immersion " << cfg.immersion << "\n";
    std::cout << kahler::format_report(report) << "\n";
    if (!report.pass && !report.worst_cases.empty()) {
        const auto& worst = *std::max_element(report.worst_cases.begin(), report.worst_cases.end(),
                                              [](const auto& a, const auto& b) { return a.residual < b.residual; });
        std::cout << "worst case: residual " << worst.residual << " at "
                  << kahler::complex_vector_json(worst.point).dump() << "\n";
    }
    if (!cfg.output.empty()) kahler::write_json(cfg.output, kahler::to_json(report));
    return report.pass ? kPass : kFail;
}

int run_suite_command(const std::string& manifold, double tol, std::uint64_t seed, int points, int samples,
                      int threads, const std::string& output) {
    const kahler::SuiteResult suite = kahler::run_suite(manifold, tol, seed, points, samples, threads);
    std::cout << manifold << "\n";
    for (const auto& r : suite.reports) std::cout << "  " << kahler::format_report(r) << "\n";
    std::cout << suite.summary();
    if (!output.empty()) kahler::write_json(output, kahler::to_json(suite.reports));
    return suite.all_pass() ? kPass : kFail;
}

int run_parse_command(const std::string& text, int dim, const std::string& vars) {
    std::set<kahler::VarKind> allowed;
    if (vars == "u")
        allowed = {kahler::VarKind::u};
    else
        allowed = {kahler::VarKind::z, kahler::VarKind::zb};
    try {
        const kahler::Expr e = kahler::parse_expression(text, dim, allowed);
        std::cout << kahler::unparse(e) << "\n";
        std::cout << "nodes: " << kahler::node_count(e) << "\n";
        return kPass;
    } catch (const kahler::ParseError& err) {
        std::cerr << text << "\n" << std::string(err.offset(), ' ') << "^\n" << "error: " << err.what() << "\n";
        if (!err.expected().empty()) {
            std::cerr << "expected:";
            for (const auto& t : err.expected()) std::cerr << " " << t;
            std::cerr << "\n";
        }
        return kError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kähler curvature checks"};
    app.require_subcommand(1);

    kahler::RunConfig cfg;
    auto* check = app.add_subcommand("check", "run one named check");
    check->add_option("name", cfg.check, "check name")->required();
    check->add_option("--manifold", cfg.manifold, "builtin uri or manifold spec file");
    check->add_option("--immersion", cfg.immersion, "builtin:immersion:<name> or immersion spec file");
    check->add_option("--points", cfg.points, "sample points")->capture_default_str();
    check->add_option("--samples", cfg.samples, "samples per point")->capture_default_str();
    check->add_option("--tol", cfg.tol, "pass/fail tolerance")->capture_default_str();
    check->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    check->add_option("--threads", cfg.threads, "worker threads")->capture_default_str();
    check->add_option("--json", cfg.output, "write the JSON report here");

    std::string suite_manifold, suite_output;
    double suite_tol = 1e-8;
    std::uint64_t suite_seed = 0;
    int suite_points = 5, suite_samples = 100, suite_threads = 1;
    auto* suite = app.add_subcommand("suite", "run every manifold-level check");
    suite->add_option("--manifold", suite_manifold, "builtin uri or manifold spec file")->required();
    suite->add_option("--tol", suite_tol, "pass/fail tolerance")->capture_default_str();
    suite->add_option("--seed", suite_seed, "random seed")->capture_default_str();
    suite->add_option("--points", suite_points, "sample points")->capture_default_str();
    suite->add_option("--samples", suite_samples, "samples per point")->capture_default_str();
    suite->add_option("--threads", suite_threads, "worker threads")->capture_default_str();
    suite->add_option("--json", suite_output, "write the JSON reports here");

    std::string expr_text, vars = "z";
    int dim = 1;
    auto* parse = app.add_subcommand("parse", "parse an expression and print it back");
    parse->add_option("--expr", expr_text, "expression text")->required();
    parse->add_option("--dim", dim, "number of variables of each kind")->capture_default_str();
    parse->add_option("--vars", vars, "z (z and zb) or u")->check(CLI::IsMember({"z", "u"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kError;
    }

    try {
        if (*check) return run_check_command(cfg);
        if (*suite)
            return run_suite_command(suite_manifold, suite_tol, suite_seed, suite_points, suite_samples, suite_threads,
                                     suite_output);
        if (*parse) return run_parse_command(expr_text, dim, vars);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kError;
    }
    return kError;
}
