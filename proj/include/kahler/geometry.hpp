#ifndef KAHLER_GEOMETRY_HPP
#define KAHLER_GEOMETRY_HPP

// Pointwise Kähler geometry from a potential K(z, zb).
//
// Conventions used throughout the library:
//   g_{ij̄}       = ∂_i ∂_j̄ K
//   Γ^k_{ij}     = g^{kl̄} ∂_i g_{jl̄}
//   R_{ij̄kl̄}    = -∂_i ∂_j̄ g_{kl̄} + g^{pq̄} (∂_i g_{kq̄}) (∂_j̄ g_{pl̄})
//   R(X,Y,Z,U)   = g(R(X,Y)Z, U),  R(X,Y) = [∇_X, ∇_Y] - ∇_[X,Y]
//   S(Y,Z)       = trace of X -> R(X,Y)Z,  S_{ij̄} = g^{kl̄} R_{ij̄kl̄} = -∂_i ∂_j̄ log det G
//   τ            = trace of S over a g-orthonormal real basis = 2 g^{ij̄} S_{ij̄}
// With these, sectional curvature is R(X,Y,Y,X) and the Fubini–Study metric
// log(1 + |z|^2) has holomorphic sectional curvature +2.
//
// A real tangent vector X is stored as its (1,0) part v: X = v^i ∂_i + conj(v^i) ∂_ī.
// Then JX <-> i v, g(X,Y) = 2 Re h(v,w), g(X,JY) = 2 Im h(v,w), where
// h(v,w) = g_{ij̄} v^i conj(w^j). In matrix form G(i,j) = g_{ij̄} and g^{ij̄} = G⁻¹(j,i).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "kahler/expr.hpp"

namespace kahler {

using Rng = std::mt19937_64;
using ChartPoint = Eigen::VectorXcd;

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Chart domain centered at the origin.
struct ChartDomain {
    enum class Shape { ball, polydisc };

    Shape shape = Shape::ball;
    std::vector<double> radii{1.0};  // one radius for a ball, one per coordinate for a polydisc

    static ChartDomain ball(double radius) { return {Shape::ball, {radius}}; }
    static ChartDomain polydisc(std::vector<double> r) { return {Shape::polydisc, std::move(r)}; }

    bool contains(const ChartPoint& p) const {
        if (shape == Shape::ball) return p.norm() < radii.at(0);
        for (Eigen::Index k = 0; k < p.size(); ++k)
            if (std::abs(p(k)) >= radii.at(static_cast<std::size_t>(k))) return false;
        return true;
    }

    /// Uniform sample from the domain shrunk by `margin` of its radius.
    ChartPoint sample(int m, Rng& rng, double margin = 0.1) const {
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform;
        ChartPoint p(m);
        if (shape == Shape::ball) {
            for (int k = 0; k < m; ++k) p(k) = cplx(normal(rng), normal(rng));
            const double dir = p.norm();
            const double r = (1.0 - margin) * radii.at(0) * std::pow(uniform(rng), 1.0 / (2.0 * m));
            return p * (r / dir);
        }
        for (int k = 0; k < m; ++k) {
            const double r = (1.0 - margin) * radii.at(static_cast<std::size_t>(k)) * std::sqrt(uniform(rng));
            const double theta = 2.0 * M_PI * uniform(rng);
            p(k) = std::polar(r, theta);
        }
        return p;
    }

    std::string describe() const {
        std::string s = shape == Shape::ball ? "ball" : "polydisc";
        for (double r : radii) s += " " + detail::format_double(r);
        return s;
    }
};

struct HermitianMetric {
    Eigen::MatrixXcd g;    // g(i,j) = g_{ij̄}
    Eigen::MatrixXcd inv;  // G⁻¹

    int dimension() const { return static_cast<int>(g.rows()); }

    /// h(v,w) = g_{ij̄} v^i conj(w^j)
    cplx hermitian(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) const {
        return v.transpose() * g * w.conjugate();
    }
};

/// Real tangent vector stored as its complex (1,0) representative.
struct RealTangentVector {
    Eigen::VectorXcd rep;

    RealTangentVector J() const { return {cplx(0.0, 1.0) * rep}; }

    friend RealTangentVector operator+(const RealTangentVector& a, const RealTangentVector& b) {
        return {a.rep + b.rep};
    }
    friend RealTangentVector operator-(const RealTangentVector& a, const RealTangentVector& b) {
        return {a.rep - b.rep};
    }
    friend RealTangentVector operator*(double s, const RealTangentVector& a) { return {s * a.rep}; }

    /// Real coordinates (Re v^1, Im v^1, ..., Re v^m, Im v^m) in the chart x + iy.
    Eigen::VectorXd real_components() const {
        Eigen::VectorXd x(2 * rep.size());
        for (Eigen::Index k = 0; k < rep.size(); ++k) {
            x(2 * k) = rep(k).real();
            x(2 * k + 1) = rep(k).imag();
        }
        return x;
    }

    static RealTangentVector from_real_components(const Eigen::VectorXd& x) {
        Eigen::VectorXcd v(x.size() / 2);
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = cplx(x(2 * k), x(2 * k + 1));
        return {v};
    }
};

/// g(X,Y)
inline double inner(const HermitianMetric& metric, const RealTangentVector& x, const RealTangentVector& y) {
    return 2.0 * metric.hermitian(x.rep, y.rep).real();
}

/// g(X,JY)
inline double inner_j(const HermitianMetric& metric, const RealTangentVector& x, const RealTangentVector& y) {
    return 2.0 * metric.hermitian(x.rep, y.rep).imag();
}

inline double norm(const HermitianMetric& metric, const RealTangentVector& x) {
    return std::sqrt(inner(metric, x, x));
}

/// Γ^k_{ij}, stored at (k*m + i)*m + j.
class ChristoffelData {
public:
    explicit ChristoffelData(int m = 0) : m_(m), data_(static_cast<std::size_t>(m * m * m)) {}

    int dimension() const { return m_; }
    cplx& operator()(int k, int i, int j) { return data_[index(k, i, j)]; }
    cplx operator()(int k, int i, int j) const { return data_[index(k, i, j)]; }

    /// Γ(v, w)^k = Γ^k_{ij} v^i w^j, the correction term of ∇̃ on (1,0) representatives.
    Eigen::VectorXcd contract(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) const {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(m_);
        for (int k = 0; k < m_; ++k)
            for (int i = 0; i < m_; ++i)
                for (int j = 0; j < m_; ++j) out(k) += (*this)(k, i, j) * v(i) * w(j);
        return out;
    }

private:
    std::size_t index(int k, int i, int j) const { return static_cast<std::size_t>((k * m_ + i) * m_ + j); }
    int m_;
    std::vector<cplx> data_;
};

/// R_{ij̄kl̄}, stored at ((i*m + j)*m + k)*m + l.
class ComplexCurvature {
public:
    explicit ComplexCurvature(int m = 0) : m_(m), data_(static_cast<std::size_t>(m * m * m * m)) {}

    int dimension() const { return m_; }
    cplx& operator()(int i, int j, int k, int l) { return data_[index(i, j, k, l)]; }
    cplx operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }

private:
    std::size_t index(int i, int j, int k, int l) const {
        return static_cast<std::size_t>(((i * m_ + j) * m_ + k) * m_ + l);
    }
    int m_;
    std::vector<cplx> data_;
};

/// R(X,Y,Z,U). Only mixed-type components survive, so
/// R(X,Y,Z,U) = Σ R_{ij̄kl̄} (x^i ȳ^j - y^i x̄^j)(z^k ū^l - u^k z̄^l).
inline double real_curvature(const ComplexCurvature& r, const RealTangentVector& x, const RealTangentVector& y,
                             const RealTangentVector& z, const RealTangentVector& u) {
    const int m = r.dimension();
    const Eigen::MatrixXcd a = x.rep * y.rep.adjoint() - y.rep * x.rep.adjoint();
    const Eigen::MatrixXcd c = z.rep * u.rep.adjoint() - u.rep * z.rep.adjoint();
    cplx sum = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            if (a(i, j) == cplx(0.0, 0.0)) continue;
            cplx inner_sum = 0.0;
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) inner_sum += r(i, j, k, l) * c(k, l);
            sum += a(i, j) * inner_sum;
        }
    return sum.real();
}

/// Ricci form S_{ij̄} with its real bilinear evaluator S(X,Y) = 2 Re S_{ij̄} x^i conj(y^j).
struct Ricci {
    Eigen::MatrixXcd s;

    double operator()(const RealTangentVector& x, const RealTangentVector& y) const {
        const cplx v = x.rep.transpose() * s * y.rep.conjugate();
        return 2.0 * v.real();
    }
};

// ---------------------------------------------------------------------------

class KahlerManifold {
public:
    KahlerManifold(int dimension, Expr potential, ChartDomain domain, std::string id = {})
        : m_(dimension), potential_(std::move(potential)), domain_(std::move(domain)), id_(std::move(id)) {
        if (m_ < 1) throw GeometryError("complex dimension must be positive");
        if (domain_.shape == ChartDomain::Shape::polydisc && domain_.radii.size() != static_cast<std::size_t>(m_))
            throw GeometryError("polydisc needs one radius per coordinate");
        build_cache();
    }

    int dimension() const { return m_; }
    const Expr& potential() const { return potential_; }
    const ChartDomain& domain() const { return domain_; }
    const std::string& id() const { return id_; }

    const Expr& metric_expr(int i, int j) const { return g_[idx2(i, j)]; }
    /// ∂_k g_{ij̄}
    const Expr& metric_dz_expr(int k, int i, int j) const { return dg_[idx3(k, i, j)]; }
    /// ∂_k̄ g_{ij̄}
    const Expr& metric_dzb_expr(int k, int i, int j) const { return dbg_[idx3(k, i, j)]; }
    /// ∂_k ∂_l̄ g_{ij̄}
    const Expr& metric_ddbar_expr(int k, int l, int i, int j) const { return ddg_[idx4(k, l, i, j)]; }
    /// ∂_i ∂_j̄ log det G
    const Expr& logdet_hessian_expr(int i, int j) const { return logdet_[idx2(i, j)]; }

    ChartPoint sample_point(Rng& rng) const { return domain_.sample(m_, rng); }

private:
    int m_;
    Expr potential_;
    ChartDomain domain_;
    std::string id_;
    std::vector<Expr> g_, dg_, dbg_, ddg_, logdet_;

    std::size_t idx2(int i, int j) const { return static_cast<std::size_t>(i * m_ + j); }
    std::size_t idx3(int k, int i, int j) const { return static_cast<std::size_t>((k * m_ + i) * m_ + j); }
    std::size_t idx4(int k, int l, int i, int j) const {
        return static_cast<std::size_t>(((k * m_ + l) * m_ + i) * m_ + j);
    }

    static VarRef z(int i) { return {VarKind::z, i + 1}; }
    static VarRef zb(int i) { return {VarKind::zb, i + 1}; }

    // Leibniz expansion; fine for the small m this library targets.
    Expr determinant() const {
        std::vector<int> perm(static_cast<std::size_t>(m_));
        for (int i = 0; i < m_; ++i) perm[static_cast<std::size_t>(i)] = i;
        Expr det = constant(0.0);
        do {
            int inversions = 0;
            for (int a = 0; a < m_; ++a)
                for (int b = a + 1; b < m_; ++b)
                    if (perm[static_cast<std::size_t>(a)] > perm[static_cast<std::size_t>(b)]) ++inversions;
            Expr term = constant(1.0);
            for (int i = 0; i < m_; ++i) term = term * g_[idx2(i, perm[static_cast<std::size_t>(i)])];
            det = (inversions % 2 == 0) ? det + term : det - term;
        } while (std::next_permutation(perm.begin(), perm.end()));
        return det;
    }

    void build_cache() {
        const auto m = static_cast<std::size_t>(m_);
        g_.resize(m * m);
        dg_.resize(m * m * m);
        dbg_.resize(m * m * m);
        ddg_.resize(m * m * m * m);
        logdet_.resize(m * m);
        std::vector<Expr> dk(m);
        for (int i = 0; i < m_; ++i) dk[static_cast<std::size_t>(i)] = wirtinger_derivative(potential_, z(i));
        for (int i = 0; i < m_; ++i)
            for (int j = 0; j < m_; ++j) g_[idx2(i, j)] = wirtinger_derivative(dk[static_cast<std::size_t>(i)], zb(j));
        for (int k = 0; k < m_; ++k)
            for (int i = 0; i < m_; ++i)
                for (int j = 0; j < m_; ++j) {
                    dg_[idx3(k, i, j)] = wirtinger_derivative(g_[idx2(i, j)], z(k));
                    dbg_[idx3(k, i, j)] = wirtinger_derivative(g_[idx2(i, j)], zb(k));
                }
        for (int k = 0; k < m_; ++k)
            for (int l = 0; l < m_; ++l)
                for (int i = 0; i < m_; ++i)
                    for (int j = 0; j < m_; ++j)
                        ddg_[idx4(k, l, i, j)] = wirtinger_derivative(dg_[idx3(k, i, j)], zb(l));
        const Expr logdet = log(determinant());
        for (int i = 0; i < m_; ++i) {
            const Expr di = wirtinger_derivative(logdet, z(i));
            for (int j = 0; j < m_; ++j) logdet_[idx2(i, j)] = wirtinger_derivative(di, zb(j));
        }
    }
};

// ---------------------------------------------------------------------------
// Pointwise quantities

namespace detail {

inline Assignment assignment_at(const ChartPoint& p) {
    return Assignment::at_point(std::vector<cplx>(p.data(), p.data() + p.size()));
}

inline void require_in_domain(const KahlerManifold& manifold, const ChartPoint& p) {
    if (p.size() != manifold.dimension()) throw GeometryError("point has wrong dimension");
    if (!manifold.domain().contains(p)) throw GeometryError("point outside the chart domain");
}

}  // namespace detail

inline HermitianMetric metric_at(const KahlerManifold& manifold, const ChartPoint& p) {
    detail::require_in_domain(manifold, p);
    const int m = manifold.dimension();
    const Assignment at = detail::assignment_at(p);
    HermitianMetric metric;
    metric.g.resize(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) metric.g(i, j) = evaluate(manifold.metric_expr(i, j), at);

    const double scale = std::max(1.0, metric.g.cwiseAbs().maxCoeff());
    if ((metric.g - metric.g.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw GeometryError("metric is not Hermitian (is the potential real?)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(metric.g, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(smallest > 0.0))
        throw GeometryError("metric is not positive definite: smallest eigenvalue " + detail::format_double(smallest));
    metric.inv = metric.g.inverse();
    return metric;
}

inline ChristoffelData christoffel_at(const KahlerManifold& manifold, const ChartPoint& p,
                                      const HermitianMetric& metric) {
    const int m = manifold.dimension();
    const Assignment at = detail::assignment_at(p);
    Eigen::MatrixXcd dg(m * m, m);  // row i*m + j, column l: ∂_i g_{jl̄}
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int l = 0; l < m; ++l) dg(i * m + j, l) = evaluate(manifold.metric_dz_expr(i, j, l), at);
    ChristoffelData gamma(m);
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j) {
                cplx s = 0.0;
                for (int l = 0; l < m; ++l) s += metric.inv(l, k) * dg(i * m + j, l);
                gamma(k, i, j) = s;
                gamma(k, j, i) = s;
            }
    return gamma;
}

inline ChristoffelData christoffel_at(const KahlerManifold& manifold, const ChartPoint& p) {
    return christoffel_at(manifold, p, metric_at(manifold, p));
}

inline ComplexCurvature curvature_at(const KahlerManifold& manifold, const ChartPoint& p,
                                     const HermitianMetric& metric) {
    const int m = manifold.dimension();
    const Assignment at = detail::assignment_at(p);
    std::vector<cplx> dz(static_cast<std::size_t>(m * m * m)), dzb(static_cast<std::size_t>(m * m * m));
    for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const auto n = static_cast<std::size_t>((k * m + i) * m + j);
                dz[n] = evaluate(manifold.metric_dz_expr(k, i, j), at);
                dzb[n] = evaluate(manifold.metric_dzb_expr(k, i, j), at);
            }
    auto d = [&](const std::vector<cplx>& t, int k, int i, int j) {
        return t[static_cast<std::size_t>((k * m + i) * m + j)];
    };
    ComplexCurvature r(m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) {
                    cplx s = -evaluate(manifold.metric_ddbar_expr(i, j, k, l), at);
                    for (int pp = 0; pp < m; ++pp)
                        for (int q = 0; q < m; ++q) s += metric.inv(q, pp) * d(dz, i, k, q) * d(dzb, j, pp, l);
                    r(i, j, k, l) = s;
                }
    return r;
}

inline ComplexCurvature curvature_at(const KahlerManifold& manifold, const ChartPoint& p) {
    return curvature_at(manifold, p, metric_at(manifold, p));
}

/// Contraction route: S_{ij̄} = g^{kl̄} R_{ij̄kl̄}.
inline Ricci ricci_from_curvature(const ComplexCurvature& r, const HermitianMetric& metric) {
    const int m = r.dimension();
    Ricci ric{Eigen::MatrixXcd::Zero(m, m)};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
                for (int l = 0; l < m; ++l) ric.s(i, j) += metric.inv(l, k) * r(i, j, k, l);
    return ric;
}

inline Ricci ricci_at(const KahlerManifold& manifold, const ChartPoint& p) {
    const HermitianMetric metric = metric_at(manifold, p);
    return ricci_from_curvature(curvature_at(manifold, p, metric), metric);
}

/// Log-determinant route: S_{ij̄} = -∂_i ∂_j̄ log det G.
inline Ricci ricci_logdet_at(const KahlerManifold& manifold, const ChartPoint& p) {
    detail::require_in_domain(manifold, p);
    const int m = manifold.dimension();
    const Assignment at = detail::assignment_at(p);
    Ricci ric{Eigen::MatrixXcd(m, m)};
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) ric.s(i, j) = -evaluate(manifold.logdet_hessian_expr(i, j), at);
    return ric;
}

inline double scalar_curvature(const Ricci& ric, const HermitianMetric& metric) {
    return 2.0 * (ric.s * metric.inv).trace().real();
}

inline double scalar_curvature_at(const KahlerManifold& manifold, const ChartPoint& p) {
    return scalar_curvature(ricci_at(manifold, p), metric_at(manifold, p));
}

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

inline Eigen::VectorXcd complex_gaussian(int m, Rng& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXcd v(m);
    for (int k = 0; k < m; ++k) v(k) = cplx(normal(rng), normal(rng));
    return v;
}

}  // namespace detail

/// Random g-unit real tangent vector.
inline RealTangentVector random_unit_vector(const HermitianMetric& metric, Rng& rng) {
    for (;;) {
        RealTangentVector x{detail::complex_gaussian(metric.dimension(), rng)};
        const double n = norm(metric, x);
        if (n > 1e-8) return (1.0 / n) * x;
    }
}

/// k vectors spanning an antiholomorphic plane, g-orthonormal with
/// g(x_a, J x_b) = 0. Gram–Schmidt over h, normalized to h(v,v) = 1/2.
inline std::vector<RealTangentVector> orthonormal_antiholomorphic_frame(const HermitianMetric& metric, int k,
                                                                        Rng& rng) {
    const int m = metric.dimension();
    if (k < 1 || k > m)
        throw GeometryError("no antiholomorphic " + std::to_string(k) + "-plane in complex dimension " +
                            std::to_string(m));
    std::vector<RealTangentVector> frame;
    frame.reserve(static_cast<std::size_t>(k));
    while (static_cast<int>(frame.size()) < k) {
        Eigen::VectorXcd v = detail::complex_gaussian(m, rng);
        const double seed_norm = std::sqrt(metric.hermitian(v, v).real());
        for (const auto& e : frame) v -= 2.0 * metric.hermitian(v, e.rep) * e.rep;
        const double pivot = std::sqrt(std::max(0.0, metric.hermitian(v, v).real()));
        if (pivot < 1e-8 * seed_norm) {
            frame.clear();  // restart on near-dependence
            continue;
        }
        frame.push_back({v / (std::sqrt(2.0) * pivot)});
    }
    return frame;
}

inline std::vector<RealTangentVector> orthonormal_antiholomorphic_frame(const KahlerManifold& manifold,
                                                                        const ChartPoint& p, int k, Rng& rng) {
    return orthonormal_antiholomorphic_frame(metric_at(manifold, p), k, rng);
}

/// e_1..e_m such that {e_1, Je_1, ..., e_m, Je_m} is g-orthonormal.
inline std::vector<RealTangentVector> orthonormal_holomorphic_basis(const HermitianMetric& metric, Rng& rng) {
    return orthonormal_antiholomorphic_frame(metric, metric.dimension(), rng);
}

inline std::vector<RealTangentVector> orthonormal_holomorphic_basis(const KahlerManifold& manifold,
                                                                    const ChartPoint& p, Rng& rng) {
    return orthonormal_holomorphic_basis(metric_at(manifold, p), rng);
}

/// Largest violation of g(x_a,x_b) = δ_ab and g(x_a,Jx_b) = 0.
inline double frame_gram_error(const HermitianMetric& metric, const std::vector<RealTangentVector>& frame) {
    double worst = 0.0;
    for (std::size_t a = 0; a < frame.size(); ++a)
        for (std::size_t b = 0; b < frame.size(); ++b) {
            const double target = a == b ? 1.0 : 0.0;
            worst = std::max(worst, std::abs(inner(metric, frame[a], frame[b]) - target));
            worst = std::max(worst, std::abs(inner_j(metric, frame[a], frame[b])));
        }
    return worst;
}

/// Real potential check: with zb bound to conj(z), K must come out real.
inline bool is_real_potential(const Expr& potential, const ChartDomain& domain, int m, Rng& rng, int trials = 20) {
    for (int t = 0; t < trials; ++t) {
        const ChartPoint p = domain.sample(m, rng);
        const cplx v = evaluate(potential, detail::assignment_at(p));
        if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v))) return false;
    }
    return true;
}

}  // namespace kahler

#endif  // KAHLER_GEOMETRY_HPP
