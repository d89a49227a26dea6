#ifndef KAHLER_CHECKS_HPP
#define KAHLER_CHECKS_HPP

// Named checks over sampled points, and the manifold suite.
//
// All randomness is drawn up front, sequentially, from one generator seeded
// with RunConfig::seed: sample points, their metrics and every frame. Only
// the curvature evaluation runs on worker threads, and results are reduced
// in point order, so a report depends on the config and not on the thread
// count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "kahler/invariants.hpp"
#include "kahler/models.hpp"
#include "kahler/specfile.hpp"
#include "kahler/submanifold.hpp"

namespace kahler {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct RunConfig {
    std::string manifold;   // builtin uri or manifold spec path
    std::string immersion;  // builtin:immersion:<name> or immersion spec path; immersion checks only
    std::string check;
    int points = 5;
    int samples = 100;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string output;  // JSON report path, empty for none

    void validate() const {
        if (points < 1) throw ConfigError("points must be at least 1");
        if (samples < 1) throw ConfigError("samples must be at least 1");
        if (!(tol > 0.0)) throw ConfigError("tolerance must be positive");
        if (threads < 1) throw ConfigError("threads must be at least 1");
        if (!is_manifold_check(check) && !is_immersion_check(check)) throw ConfigError("unknown check '" + check + "'");
        if (is_immersion_check(check) && immersion.empty())
            throw ConfigError("check '" + check + "' needs an immersion");
        if (is_manifold_check(check) && manifold.empty()) throw ConfigError("check '" + check + "' needs a manifold");
    }

    static bool is_manifold_check(const std::string& name) {
        const auto& v = manifold_checks();
        return std::find(v.begin(), v.end(), name) != v.end();
    }
    static bool is_immersion_check(const std::string& name) {
        const auto& v = immersion_checks();
        return std::find(v.begin(), v.end(), name) != v.end();
    }
};

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace detail {

// Runs body(0..count-1) on up to `threads` threads; rethrows the first failure in index order.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&](std::size_t first, std::size_t stride) {
        for (std::size_t i = first; i < count; i += stride) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t t = std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(count, 1));
    if (t <= 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < t; ++k) pool.emplace_back(worker, k, t);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

using Frame = std::vector<RealTangentVector>;

struct PointJob {
    ChartPoint point;        // chart point, or the parameter point for immersions
    Eigen::VectorXd params;  // immersion parameter point
    HermitianMetric metric;
    std::vector<Frame> frames;
    std::vector<Eigen::VectorXd> directions;  // parallel-h
};

struct PointOutcome {
    std::vector<double> values;  // one per sample
    std::vector<Frame> frames;   // filled when the frame is only known after evaluation
};

inline std::vector<Eigen::VectorXcd> reps(const Frame& frame) {
    std::vector<Eigen::VectorXcd> out;
    for (const auto& v : frame) out.push_back(v.rep);
    return out;
}

inline Frame draw_frame(const std::string& check, const HermitianMetric& metric, Rng& rng) {
    if (check == "bochner" || check == "reconstruct-2-3")
        return {random_unit_vector(metric, rng), random_unit_vector(metric, rng), random_unit_vector(metric, rng),
                random_unit_vector(metric, rng)};
    if (check == "lemma") return orthonormal_antiholomorphic_frame(metric, 3, rng);
    if (check == "basis-sum") return orthonormal_holomorphic_basis(metric, rng);
    if (check == "einstein") return {random_unit_vector(metric, rng), random_unit_vector(metric, rng)};
    if (check == "ricci-offdiag") return orthonormal_antiholomorphic_frame(metric, 2, rng);
    if (check == "chsc") return {random_unit_vector(metric, rng)};
    throw ConfigError("unknown check '" + check + "'");
}

inline double evaluate_frame(const std::string& check, const PointData& pd, const Frame& f) {
    if (check == "bochner") return std::abs(bochner_at(pd, f[0], f[1], f[2], f[3]));
    if (check == "reconstruct-2-3")
        return std::abs(pd.r(f[0], f[1], f[2], f[3]) - reconstruct_curvature_from_ricci(pd, f[0], f[1], f[2], f[3]));
    if (check == "lemma") return std::abs(lemma_residual(pd, f[0], f[1], f[2]));
    if (check == "basis-sum") return basis_sum(pd, f);
    if (check == "einstein") return std::abs(pd.ricci(f[0], f[1]) - pd.tau / (2.0 * pd.dimension()) * pd.g(f[0], f[1]));
    if (check == "ricci-offdiag") return std::abs(pd.ricci(f[0], f[1]));
    if (check == "chsc") return holomorphic_sectional_curvature(pd, f[0]);
    throw ConfigError("unknown check '" + check + "'");
}

inline CheckReport blank_report(const RunConfig& cfg) {
    CheckReport r;
    r.manifold = cfg.manifold;
    r.check = cfg.check;
    r.seed = cfg.seed;
    r.points = cfg.points;
    r.samples = cfg.samples;
    r.tolerance = cfg.tol;
    return r;
}

// Reduction for checks whose per-sample values are nonnegative residuals.
inline void reduce_residuals(CheckReport& report, const std::vector<PointJob>& jobs,
                             const std::vector<PointOutcome>& out) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < jobs.size(); ++p) {
        const auto& values = out[p].values;
        const auto& frames = out[p].frames.empty() ? jobs[p].frames : out[p].frames;
        std::size_t worst = 0;
        for (std::size_t s = 0; s < values.size(); ++s) {
            sum += values[s];
            ++count;
            if (values[s] > values[worst]) worst = s;
        }
        report.worst_cases.push_back({jobs[p].point, reps(frames[worst]), values[worst]});
        report.max_residual = std::max(report.max_residual, values[worst]);
    }
    report.mean_residual = count ? sum / static_cast<double>(count) : 0.0;
}

inline CheckReport vacuous(CheckReport report, const std::string& why) {
    report.note = why;
    report.set_verdict();
    report.timestamp = utc_timestamp();
    return report;
}

}  // namespace detail

/// Runs a manifold-level check on an already built manifold.
inline CheckReport run_manifold_check(const RunConfig& cfg, const KahlerManifold& manifold) {
    cfg.validate();
    if (!RunConfig::is_manifold_check(cfg.check)) throw ConfigError("'" + cfg.check + "' is not a manifold check");
    CheckReport report = detail::blank_report(cfg);
    const int m = manifold.dimension();
    if (cfg.check == "lemma" && m < 3) return detail::vacuous(report, "needs complex dimension at least 3; skipped");
    if (cfg.check == "ricci-offdiag" && m < 2)
        return detail::vacuous(report, "needs complex dimension at least 2; vacuous");

    Rng rng(cfg.seed);
    std::vector<detail::PointJob> jobs(static_cast<std::size_t>(cfg.points));
    for (auto& job : jobs) {
        job.point = manifold.sample_point(rng);
        job.metric = metric_at(manifold, job.point);
        for (int s = 0; s < cfg.samples; ++s) job.frames.push_back(detail::draw_frame(cfg.check, job.metric, rng));
    }
    std::vector<detail::PointOutcome> out(jobs.size());
    detail::parallel_for(jobs.size(), cfg.threads, [&](std::size_t p) {
        const PointData pd = point_data(manifold, jobs[p].point);
        for (const auto& f : jobs[p].frames) out[p].values.push_back(detail::evaluate_frame(cfg.check, pd, f));
    });

    if (cfg.check == "basis-sum") {
        // residual per point: standard deviation of the sum over bases
        double sum = 0.0;
        for (std::size_t p = 0; p < jobs.size(); ++p) {
            const auto& v = out[p].values;
            double mean = 0.0, var = 0.0;
            for (double x : v) mean += x;
            mean /= static_cast<double>(v.size());
            std::size_t worst = 0;
            for (std::size_t s = 0; s < v.size(); ++s) {
                var += (v[s] - mean) * (v[s] - mean);
                if (std::abs(v[s] - mean) > std::abs(v[worst] - mean)) worst = s;
            }
            const double sd = std::sqrt(var / static_cast<double>(v.size()));
            report.worst_cases.push_back({jobs[p].point, detail::reps(jobs[p].frames[worst]), sd});
            report.max_residual = std::max(report.max_residual, sd);
            sum += sd;
        }
        report.mean_residual = sum / static_cast<double>(jobs.size());
    } else if (cfg.check == "chsc") {
        std::vector<double> all;
        for (const auto& o : out) all.insert(all.end(), o.values.begin(), o.values.end());
        const ChscFit fit = chsc_fit_values(all);
        const double scale = std::abs(fit.c) > 1e-12 ? std::abs(fit.c) : 1.0;
        double sum = 0.0;
        for (std::size_t p = 0; p < jobs.size(); ++p) {
            std::size_t worst = 0;
            const auto& v = out[p].values;
            for (std::size_t s = 0; s < v.size(); ++s) {
                sum += std::abs(v[s] - fit.c) / scale;
                if (std::abs(v[s] - fit.c) > std::abs(v[worst] - fit.c)) worst = s;
            }
            report.worst_cases.push_back(
                {jobs[p].point, detail::reps(jobs[p].frames[worst]), std::abs(v[worst] - fit.c) / scale});
        }
        report.max_residual = fit.spread;
        report.mean_residual = sum / static_cast<double>(all.size());
        report.fitted_c = fit.c;
        std::ostringstream note;
        note.precision(12);
        note << "c = " << fit.c;
        report.note = note.str();
    } else {
        detail::reduce_residuals(report, jobs, out);
    }
    report.set_verdict();
    report.timestamp = utc_timestamp();
    return report;
}

/// Runs an immersion-level check.
inline CheckReport run_immersion_check(const RunConfig& cfg, const Immersion& imm) {
    cfg.validate();
    if (!RunConfig::is_immersion_check(cfg.check)) throw ConfigError("'" + cfg.check + "' is not an immersion check");
    CheckReport report = detail::blank_report(cfg);
    if (report.manifold.empty()) report.manifold = imm.ambient().id();
    const int n = imm.parameters();

    Rng rng(cfg.seed);
    std::normal_distribution<double> normal;
    std::vector<detail::PointJob> jobs(static_cast<std::size_t>(cfg.points));
    for (auto& job : jobs) {
        job.params = imm.box().sample(rng);
        job.point = job.params.cast<cplx>();
        if (cfg.check == "parallel-h") {
            for (int a = 0; a < n; ++a) job.directions.push_back(Eigen::VectorXd::Unit(n, a));
            for (int s = 0; s < cfg.samples; ++s) {
                Eigen::VectorXd x(n);
                for (int a = 0; a < n; ++a) x(a) = normal(rng);
                job.directions.push_back(x);
            }
        }
    }
    std::vector<detail::PointOutcome> out(jobs.size());
    detail::parallel_for(jobs.size(), cfg.threads, [&](std::size_t p) {
        const Eigen::VectorXd& u = jobs[p].params;
        const FrameAtParameter fr = frame_at(imm, u);
        auto& o = out[p];
        if (cfg.check == "umbilical") {
            o.values.push_back(umbilical_residual(imm, u));
            o.frames.push_back(fr.tangents);
        } else if (cfg.check == "parallel-h") {
            for (const auto& x : jobs[p].directions) {
                o.values.push_back(parallel_h_at(imm, u, {x}));
                o.frames.push_back({fr.combine(x)});
            }
        } else {
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) {
                        o.values.push_back(cfg.check == "codazzi-general"
                                               ? codazzi_residual_general(imm, u, a, b, c)
                                               : codazzi_residual_umbilical(imm, u, a, b, c));
                        const auto& t = fr.tangents;
                        o.frames.push_back({t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)],
                                            t[static_cast<std::size_t>(c)]});
                    }
        }
    });
    detail::reduce_residuals(report, jobs, out);
    report.set_verdict();
    report.timestamp = utc_timestamp();
    return report;
}

/// Loads the sources named in the config and dispatches.
inline CheckReport run_check(const RunConfig& cfg) {
    cfg.validate();
    if (RunConfig::is_immersion_check(cfg.check))
        return run_immersion_check(cfg, load_immersion(cfg.immersion, cfg.manifold));
    return run_manifold_check(cfg, load_manifold(cfg.manifold));
}

struct SuiteResult {
    std::vector<CheckReport> reports;
    bool bochner_flat = false;
    bool einstein = false;
    bool constant_hsc = false;
    double hsc_constant = 0.0;

    const CheckReport* find(const std::string& check) const {
        for (const auto& r : reports)
            if (r.check == check) return &r;
        return nullptr;
    }

    bool all_pass() const {
        for (const auto& r : reports)
            if (!r.pass) return false;
        return true;
    }

    std::string summary() const {
        std::ostringstream s;
        s << "Bochner-flat: " << (bochner_flat ? "yes" : "no") << "\n";
        s << "Einstein: " << (einstein ? "yes" : "no") << "\n";
        s << "constant holomorphic sectional curvature: " << (constant_hsc ? "yes" : "no");
        if (constant_hsc) {
            s.precision(12);
            s << " (c = " << hsc_constant << ")";
        }
        s << "\n";
        return s.str();
    }
};

/// Every manifold-level check with the same seed, plus the Bochner -> Einstein -> constant HSC summary.
inline SuiteResult run_suite(const std::string& manifold_source, double tol, std::uint64_t seed, int points = 5,
                             int samples = 100, int threads = 1) {
    const KahlerManifold manifold = load_manifold(manifold_source);
    SuiteResult result;
    for (const auto& name : manifold_checks()) {
        RunConfig cfg;
        cfg.manifold = manifold_source;
        cfg.check = name;
        cfg.points = points;
        cfg.samples = samples;
        cfg.tol = tol;
        cfg.seed = seed;
        cfg.threads = threads;
        result.reports.push_back(run_manifold_check(cfg, manifold));
    }
    result.bochner_flat = result.find("bochner")->pass;
    result.einstein = result.find("einstein")->pass;
    const CheckReport* chsc = result.find("chsc");
    result.constant_hsc = chsc->pass;
    result.hsc_constant = chsc->fitted_c.value_or(0.0);
    return result;
}

}  // namespace kahler

#endif  // KAHLER_CHECKS_HPP
