#ifndef KAHLER_INVARIANTS_HPP
#define KAHLER_INVARIANTS_HPP

// Pointwise curvature identities: Bochner tensor, the antiholomorphic
// 3-frame criterion, the basis-sum criterion, Einstein and off-diagonal Ricci
// residuals, the B = 0 reconstruction of R from S and τ, and holomorphic
// sectional curvature.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kahler/geometry.hpp"

namespace kahler {

class FrameError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// R, S and τ at one point of one manifold.
struct PointData {
    ChartPoint point;
    HermitianMetric metric;
    ChristoffelData christoffel;
    ComplexCurvature curvature;
    Ricci ricci;
    double tau = 0.0;

    int dimension() const { return metric.dimension(); }

    double g(const RealTangentVector& x, const RealTangentVector& y) const { return inner(metric, x, y); }
    double r(const RealTangentVector& x, const RealTangentVector& y, const RealTangentVector& z,
             const RealTangentVector& u) const {
        return real_curvature(curvature, x, y, z, u);
    }
};

inline PointData point_data(const KahlerManifold& manifold, const ChartPoint& p) {
    PointData pd;
    pd.point = p;
    pd.metric = metric_at(manifold, p);
    pd.christoffel = christoffel_at(manifold, p, pd.metric);
    pd.curvature = curvature_at(manifold, p, pd.metric);
    pd.ricci = ricci_from_curvature(pd.curvature, pd.metric);
    pd.tau = scalar_curvature(pd.ricci, pd.metric);
    return pd;
}

namespace detail {

// The two brackets of the Bochner tensor: the metric–Ricci combination and
// the purely metric combination.
struct BochnerBrackets {
    double ricci_terms = 0.0;
    double metric_terms = 0.0;
};

inline BochnerBrackets bochner_brackets(const PointData& pd, const RealTangentVector& x, const RealTangentVector& y,
                                        const RealTangentVector& z, const RealTangentVector& u) {
    const HermitianMetric& m = pd.metric;
    const Ricci& s = pd.ricci;
    const RealTangentVector jy = y.J(), jz = z.J(), ju = u.J();
    auto g = [&](const RealTangentVector& a, const RealTangentVector& b) { return inner(m, a, b); };

    BochnerBrackets b;
    b.ricci_terms = g(x, u) * s(y, z) - g(x, z) * s(y, u) + g(y, z) * s(x, u) - g(y, u) * s(x, z) +
                    g(x, ju) * s(y, jz) - g(x, jz) * s(y, ju) + g(y, jz) * s(x, ju) - g(y, ju) * s(x, jz) -
                    2.0 * g(x, jy) * s(z, ju) - 2.0 * g(z, ju) * s(x, jy);
    b.metric_terms = g(x, u) * g(y, z) - g(x, z) * g(y, u) + g(x, ju) * g(y, jz) - g(x, jz) * g(y, ju) -
                     2.0 * g(x, jy) * g(z, ju);
    return b;
}

}  // namespace detail

/// B(X,Y,Z,U) = R - {Ricci terms} / (2(m+2)) + τ {metric terms} / (4(m+1)(m+2)).
inline double bochner_at(const PointData& pd, const RealTangentVector& x, const RealTangentVector& y,
                         const RealTangentVector& z, const RealTangentVector& u) {
    const double m = pd.dimension();
    const auto br = detail::bochner_brackets(pd, x, y, z, u);
    return pd.r(x, y, z, u) - br.ricci_terms / (2.0 * (m + 2.0)) +
           pd.tau * br.metric_terms / (4.0 * (m + 1.0) * (m + 2.0));
}

/// Right-hand side of the reconstruction of R from S and τ when B = 0;
/// R minus this value is B.
inline double reconstruct_curvature_from_ricci(const PointData& pd, const RealTangentVector& x,
                                               const RealTangentVector& y, const RealTangentVector& z,
                                               const RealTangentVector& u) {
    const double m = pd.dimension();
    const auto br = detail::bochner_brackets(pd, x, y, z, u);
    return br.ricci_terms / (2.0 * (m + 2.0)) - pd.tau * br.metric_terms / (4.0 * (m + 1.0) * (m + 2.0));
}

/// R(x,Jx,y,z) - 2 R(x,y,Jx,z) for an orthonormal frame spanning an antiholomorphic 3-plane.
inline double lemma_residual(const PointData& pd, const RealTangentVector& x, const RealTangentVector& y,
                             const RealTangentVector& z) {
    if (frame_gram_error(pd.metric, {x, y, z}) > 1e-8)
        throw FrameError("lemma_residual needs an orthonormal antiholomorphic 3-frame");
    return pd.r(x, x.J(), y, z) - 2.0 * pd.r(x, y, x.J(), z);
}

/// Σ_i R(e_i, Je_i, Je_i, e_i) over a basis with {e_i, Je_i} orthonormal.
inline double basis_sum(const PointData& pd, const std::vector<RealTangentVector>& basis) {
    if (static_cast<int>(basis.size()) != pd.dimension() || frame_gram_error(pd.metric, basis) > 1e-8)
        throw FrameError("basis_sum needs m vectors e_i with {e_i, Je_i} orthonormal");
    double sum = 0.0;
    for (const auto& e : basis) sum += pd.r(e, e.J(), e.J(), e);
    return sum;
}

/// H(x) = R(x,Jx,Jx,x) / g(x,x)^2.
inline double holomorphic_sectional_curvature(const PointData& pd, const RealTangentVector& x) {
    const double gxx = pd.g(x, x);
    if (!(gxx > 0.0)) throw FrameError("holomorphic sectional curvature of the zero vector");
    return pd.r(x, x.J(), x.J(), x) / (gxx * gxx);
}

/// max |S(X,Y) - τ/(2m) g(X,Y)| over random unit pairs.
inline double einstein_residual(const PointData& pd, int samples, Rng& rng) {
    const double factor = pd.tau / (2.0 * pd.dimension());
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const RealTangentVector x = random_unit_vector(pd.metric, rng);
        const RealTangentVector y = random_unit_vector(pd.metric, rng);
        worst = std::max(worst, std::abs(pd.ricci(x, y) - factor * pd.g(x, y)));
    }
    return worst;
}

/// max |S(y,z)| over unit pairs with g(y,z) = g(y,Jz) = 0. Vacuous when m = 1.
inline double ricci_offdiagonal_check(const PointData& pd, int samples, Rng& rng) {
    if (pd.dimension() < 2) return 0.0;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        const auto frame = orthonormal_antiholomorphic_frame(pd.metric, 2, rng);
        worst = std::max(worst, std::abs(pd.ricci(frame[0], frame[1])));
    }
    return worst;
}

struct ChscFit {
    double c = 0.0;       // mean holomorphic sectional curvature
    double spread = 0.0;  // (max - min) / |mean|, or max - min when the mean vanishes
};

/// Relative spread of H over a sample of directions; constant HSC iff the spread vanishes.
inline ChscFit chsc_fit_values(const std::vector<double>& values) {
    ChscFit fit;
    if (values.empty()) return fit;
    double lo = values.front(), hi = values.front(), sum = 0.0;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        sum += v;
    }
    fit.c = sum / static_cast<double>(values.size());
    fit.spread = std::abs(fit.c) > 1e-12 ? (hi - lo) / std::abs(fit.c) : hi - lo;
    return fit;
}

inline ChscFit chsc_fit(const KahlerManifold& manifold, int points, int samples, Rng& rng) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(points * samples));
    for (int p = 0; p < points; ++p) {
        const PointData pd = point_data(manifold, manifold.sample_point(rng));
        for (int s = 0; s < samples; ++s)
            values.push_back(holomorphic_sectional_curvature(pd, random_unit_vector(pd.metric, rng)));
    }
    return chsc_fit_values(values);
}

// ---------------------------------------------------------------------------
// Reports

/// The worst sample seen at one point.
struct WorstCase {
    ChartPoint point;                    // chart point, or parameter point (imaginary parts 0) for immersions
    std::vector<Eigen::VectorXcd> frame; // vectors of the sample that produced the residual
    double residual = 0.0;
};

struct CheckReport {
    std::string manifold;
    std::string check;
    std::uint64_t seed = 0;
    int points = 0;
    int samples = 0;
    double tolerance = 1e-8;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    bool pass = true;
    std::vector<WorstCase> worst_cases;  // one per point
    std::string timestamp;
    std::string note;                 // e.g. why a check was skipped; not serialized
    std::optional<double> fitted_c;   // chsc only; not serialized

    void set_verdict() { pass = max_residual <= tolerance; }
};

}  // namespace kahler

#endif  // KAHLER_INVARIANTS_HPP
