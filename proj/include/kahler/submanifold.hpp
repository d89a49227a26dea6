#ifndef KAHLER_SUBMANIFOLD_HPP
#define KAHLER_SUBMANIFOLD_HPP

// Immersed submanifolds u -> f(u) of a Kähler chart, with real parameters
// u_1..u_n. Tangent fields T_a = ∂f/∂u_a are used in their (1,0)
// representative form, so ∇̃_{T_a} T_b has representative
// ∂_a ∂_b f + Γ(T_a, T_b).
//
// The image of f and its first and second parameter derivatives are
// symbolic. Parameter derivatives of derived fields (α, H) are central
// differences with one Richardson step; normal components are taken with
// the orthogonal projector built from the tangent frame, which is smooth
// along the stencil.

#include <Eigen/Dense>

#include <memory>
#include <string>
#include <vector>

#include "kahler/geometry.hpp"

namespace kahler {

class NotUmbilicError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

struct ParameterBox {
    std::vector<double> lo;
    std::vector<double> hi;

    int dimension() const { return static_cast<int>(lo.size()); }

    bool contains(const Eigen::VectorXd& u) const {
        for (int a = 0; a < dimension(); ++a)
            if (u(a) < lo[static_cast<std::size_t>(a)] || u(a) > hi[static_cast<std::size_t>(a)]) return false;
        return true;
    }

    /// Uniform sample in the box shrunk by `margin` of each side length.
    Eigen::VectorXd sample(Rng& rng, double margin = 0.1) const {
        std::uniform_real_distribution<double> uniform;
        Eigen::VectorXd u(dimension());
        for (int a = 0; a < dimension(); ++a) {
            const double l = lo[static_cast<std::size_t>(a)], h = hi[static_cast<std::size_t>(a)];
            u(a) = l + (h - l) * (margin + (1.0 - 2.0 * margin) * uniform(rng));
        }
        return u;
    }
};

class Immersion {
public:
    Immersion(std::shared_ptr<const KahlerManifold> ambient, int parameters, std::vector<Expr> components,
              ParameterBox box, std::string id = {})
        : ambient_(std::move(ambient)),
          n_(parameters),
          f_(std::move(components)),
          box_(std::move(box)),
          id_(std::move(id)) {
        if (!ambient_) throw GeometryError("immersion needs an ambient manifold");
        if (n_ < 1) throw GeometryError("immersion needs at least one parameter");
        if (static_cast<int>(f_.size()) != ambient_->dimension())
            throw GeometryError("immersion needs one component per ambient coordinate");
        if (box_.dimension() != n_) throw GeometryError("parameter box dimension does not match parameter count");
        const auto m = f_.size();
        const auto n = static_cast<std::size_t>(n_);
        df_.resize(n * m);
        d2f_.resize(n * n * m);
        for (int a = 0; a < n_; ++a)
            for (std::size_t k = 0; k < m; ++k)
                df_[static_cast<std::size_t>(a) * m + k] = wirtinger_derivative(f_[k], {VarKind::u, a + 1});
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b)
                for (std::size_t k = 0; k < m; ++k)
                    d2f_[(static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b)) * m + k] =
                        wirtinger_derivative(df_[static_cast<std::size_t>(a) * m + k], {VarKind::u, b + 1});
    }

    const KahlerManifold& ambient() const { return *ambient_; }
    const std::shared_ptr<const KahlerManifold>& ambient_ptr() const { return ambient_; }
    int parameters() const { return n_; }
    const ParameterBox& box() const { return box_; }
    const std::string& id() const { return id_; }
    const std::vector<Expr>& components() const { return f_; }

    ChartPoint position(const Eigen::VectorXd& u) const { return eval(f_, 0, u); }
    /// ∂f/∂u_a
    Eigen::VectorXcd tangent(const Eigen::VectorXd& u, int a) const {
        return eval(df_, static_cast<std::size_t>(a) * f_.size(), u);
    }
    /// ∂²f/∂u_a∂u_b
    Eigen::VectorXcd second_derivative(const Eigen::VectorXd& u, int a, int b) const {
        return eval(d2f_, (static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(b)) *
                              f_.size(),
                    u);
    }

private:
    std::shared_ptr<const KahlerManifold> ambient_;
    int n_;
    std::vector<Expr> f_, df_, d2f_;
    ParameterBox box_;
    std::string id_;

    Eigen::VectorXcd eval(const std::vector<Expr>& table, std::size_t offset, const Eigen::VectorXd& u) const {
        const Assignment at = Assignment::at_parameters(std::vector<double>(u.data(), u.data() + u.size()));
        Eigen::VectorXcd v(static_cast<Eigen::Index>(f_.size()));
        for (std::size_t k = 0; k < f_.size(); ++k) v(static_cast<Eigen::Index>(k)) = evaluate(table[offset + k], at);
        return v;
    }
};

/// Tangent/normal decomposition of the ambient tangent space at f(u).
struct FrameAtParameter {
    Eigen::VectorXd u;
    ChartPoint point;
    HermitianMetric metric;
    ChristoffelData christoffel;
    std::vector<RealTangentVector> tangents;  // T_a
    std::vector<RealTangentVector> normals;   // g-orthonormal basis of the normal space
    Eigen::MatrixXd induced;                  // g(T_a, T_b)
    Eigen::MatrixXd induced_inv;

    int parameters() const { return static_cast<int>(tangents.size()); }

    double g(const RealTangentVector& x, const RealTangentVector& y) const { return inner(metric, x, y); }

    /// Coefficients c with tangential part of w = Σ c_a T_a.
    Eigen::VectorXd tangent_coefficients(const RealTangentVector& w) const {
        Eigen::VectorXd rhs(parameters());
        for (int a = 0; a < parameters(); ++a) rhs(a) = g(tangents[static_cast<std::size_t>(a)], w);
        return induced_inv * rhs;
    }

    RealTangentVector combine(const Eigen::VectorXd& c) const {
        RealTangentVector out{Eigen::VectorXcd::Zero(point.size())};
        for (int a = 0; a < parameters(); ++a) out.rep += c(a) * tangents[static_cast<std::size_t>(a)].rep;
        return out;
    }

    RealTangentVector tangential_part(const RealTangentVector& w) const { return combine(tangent_coefficients(w)); }
    RealTangentVector normal_part(const RealTangentVector& w) const { return w - tangential_part(w); }
};

namespace detail {

inline Eigen::MatrixXd real_jacobian(const std::vector<RealTangentVector>& tangents) {
    const auto n = static_cast<Eigen::Index>(tangents.size());
    Eigen::MatrixXd jac(2 * tangents.front().rep.size(), n);
    for (Eigen::Index a = 0; a < n; ++a) jac.col(a) = tangents[static_cast<std::size_t>(a)].real_components();
    return jac;
}

// Real Gram–Schmidt of the tangents followed by the deterministic completion
// e_1, i e_1, e_2, i e_2, ...; the completion vectors that survive span the normal space.
inline std::vector<RealTangentVector> normal_basis(const HermitianMetric& metric,
                                                   const std::vector<RealTangentVector>& tangents) {
    const int m = metric.dimension();
    std::vector<RealTangentVector> ortho;
    auto reduce = [&](RealTangentVector v) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& e : ortho) v = v - inner(metric, v, e) * e;
        return v;
    };
    for (const auto& t : tangents) {
        RealTangentVector v = reduce(t);
        ortho.push_back((1.0 / norm(metric, v)) * v);
    }
    std::vector<RealTangentVector> normals;
    for (int k = 0; k < m && static_cast<int>(ortho.size()) < 2 * m; ++k)
        for (cplx unit : {cplx(1.0, 0.0), cplx(0.0, 1.0)}) {
            Eigen::VectorXcd seed = Eigen::VectorXcd::Zero(m);
            seed(k) = unit;
            RealTangentVector v = reduce({seed});
            const double len = norm(metric, v);
            if (len < 1e-6 * norm(metric, {seed})) continue;
            v = (1.0 / len) * v;
            ortho.push_back(v);
            normals.push_back(v);
        }
    return normals;
}

}  // namespace detail

inline FrameAtParameter frame_at(const Immersion& imm, const Eigen::VectorXd& u) {
    const KahlerManifold& ambient = imm.ambient();
    FrameAtParameter fr;
    fr.u = u;
    fr.point = imm.position(u);
    if (!ambient.domain().contains(fr.point)) throw GeometryError("immersion leaves the ambient chart domain");
    fr.metric = metric_at(ambient, fr.point);
    fr.christoffel = christoffel_at(ambient, fr.point, fr.metric);
    const int n = imm.parameters();
    for (int a = 0; a < n; ++a) fr.tangents.push_back({imm.tangent(u, a)});
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::real_jacobian(fr.tangents));
    const double smallest = svd.singularValues()(svd.singularValues().size() - 1);
    if (svd.singularValues().size() < n || !(smallest > 1e-8))
        throw GeometryError("immersion differential is rank deficient (smallest singular value " +
                            detail::format_double(smallest) + ")");
    fr.induced.resize(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            fr.induced(a, b) = fr.g(fr.tangents[static_cast<std::size_t>(a)], fr.tangents[static_cast<std::size_t>(b)]);
    fr.induced_inv = fr.induced.inverse();
    fr.normals = detail::normal_basis(fr.metric, fr.tangents);
    return fr;
}

inline Eigen::MatrixXd induced_metric(const Immersion& imm, const Eigen::VectorXd& u) {
    return frame_at(imm, u).induced;
}

/// α(T_a, T_b), stored at a*n + b.
struct SecondFundamentalForm {
    int n = 0;
    std::vector<RealTangentVector> values;

    const RealTangentVector& operator()(int a, int b) const { return values[static_cast<std::size_t>(a * n + b)]; }
};

namespace detail {

// ∇̃_{T_a} T_b
inline RealTangentVector ambient_derivative_of_tangent(const Immersion& imm, const FrameAtParameter& fr, int a, int b) {
    return {imm.second_derivative(fr.u, a, b) +
            fr.christoffel.contract(fr.tangents[static_cast<std::size_t>(a)].rep,
                                    fr.tangents[static_cast<std::size_t>(b)].rep)};
}

inline SecondFundamentalForm second_fundamental_form(const Immersion& imm, const FrameAtParameter& fr) {
    SecondFundamentalForm alpha;
    alpha.n = fr.parameters();
    for (int a = 0; a < alpha.n; ++a)
        for (int b = 0; b < alpha.n; ++b)
            alpha.values.push_back(fr.normal_part(ambient_derivative_of_tangent(imm, fr, a, b)));
    return alpha;
}

inline RealTangentVector mean_curvature(const FrameAtParameter& fr, const SecondFundamentalForm& alpha) {
    RealTangentVector h{Eigen::VectorXcd::Zero(fr.point.size())};
    for (int a = 0; a < alpha.n; ++a)
        for (int b = 0; b < alpha.n; ++b) h.rep += fr.induced_inv(a, b) * alpha(a, b).rep;
    return (1.0 / alpha.n) * h;
}

constexpr double kStencilStep = 1e-5;

inline void require_stencil_room(const Immersion& imm, const Eigen::VectorXd& u, double h = kStencilStep) {
    for (int a = 0; a < imm.parameters(); ++a) {
        Eigen::VectorXd lo = u, hi = u;
        lo(a) -= h;
        hi(a) += h;
        if (!imm.box().contains(lo) || !imm.box().contains(hi))
            throw GeometryError("parameter point too close to the domain boundary for the difference stencil");
    }
}

// ∂_a of a representative-valued field along the parameter domain.
template <class Field>
Eigen::VectorXcd parameter_derivative(const Field& field, const Eigen::VectorXd& u, int a, double h = kStencilStep) {
    auto central = [&](double step) {
        Eigen::VectorXd up = u, um = u;
        up(a) += step;
        um(a) -= step;
        return Eigen::VectorXcd((field(up) - field(um)) / (2.0 * step));
    };
    return (4.0 * central(h / 2.0) - central(h)) / 3.0;
}

// D_{T_a} ξ = normal part of ∂_a ξ + Γ(T_a, ξ) for a normal field ξ along the immersion.
template <class Field>
RealTangentVector normal_derivative(const FrameAtParameter& fr, const Field& field, int a) {
    const Eigen::VectorXcd xi = field(fr.u);
    const Eigen::VectorXcd d = parameter_derivative(field, fr.u, a) +
                               fr.christoffel.contract(fr.tangents[static_cast<std::size_t>(a)].rep, xi);
    return fr.normal_part({d});
}

// Γ^d_{ab} of the induced connection, stored at (d*n + a)*n + b.
inline std::vector<double> induced_christoffel(const Immersion& imm, const FrameAtParameter& fr) {
    const int n = fr.parameters();
    std::vector<double> gamma(static_cast<std::size_t>(n * n * n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            const Eigen::VectorXd c = fr.tangent_coefficients(ambient_derivative_of_tangent(imm, fr, a, b));
            for (int d = 0; d < n; ++d) gamma[static_cast<std::size_t>((d * n + a) * n + b)] = c(d);
        }
    return gamma;
}

// {R(T_a, T_b) T_c}^⊥ = Σ_j R(T_a, T_b, T_c, ν_j) ν_j.
inline RealTangentVector normal_curvature_term(const ComplexCurvature& r, const FrameAtParameter& fr, int a, int b,
                                               int c) {
    RealTangentVector out{Eigen::VectorXcd::Zero(fr.point.size())};
    const auto& t = fr.tangents;
    for (const auto& nu : fr.normals)
        out.rep += real_curvature(r, t[static_cast<std::size_t>(a)], t[static_cast<std::size_t>(b)],
                                  t[static_cast<std::size_t>(c)], nu) *
                   nu.rep;
    return out;
}

}  // namespace detail

inline SecondFundamentalForm second_fundamental_form(const Immersion& imm, const Eigen::VectorXd& u) {
    return detail::second_fundamental_form(imm, frame_at(imm, u));
}

inline RealTangentVector mean_curvature(const Immersion& imm, const Eigen::VectorXd& u) {
    const FrameAtParameter fr = frame_at(imm, u);
    return detail::mean_curvature(fr, detail::second_fundamental_form(imm, fr));
}

/// max_{a,b} |α(T_a,T_b) - g(T_a,T_b) H|
inline double umbilical_residual(const Immersion& imm, const Eigen::VectorXd& u) {
    const FrameAtParameter fr = frame_at(imm, u);
    const SecondFundamentalForm alpha = detail::second_fundamental_form(imm, fr);
    const RealTangentVector h = detail::mean_curvature(fr, alpha);
    double worst = 0.0;
    for (int a = 0; a < alpha.n; ++a)
        for (int b = 0; b < alpha.n; ++b)
            worst = std::max(worst, norm(fr.metric, alpha(a, b) - fr.induced(a, b) * h));
    return worst;
}

struct WeingartenSplit {
    RealTangentVector ambient;     // ∇̃_X ξ
    RealTangentVector tangential;  // -A_ξ X
    RealTangentVector normal;      // D_X ξ
};

/// Splits ∇̃_X ξ for a normal field ξ (one expression in u per ambient coordinate)
/// and X = Σ x_a T_a.
inline WeingartenSplit weingarten_split(const Immersion& imm, const Eigen::VectorXd& u, const std::vector<Expr>& xi,
                                        const Eigen::VectorXd& x) {
    const FrameAtParameter fr = frame_at(imm, u);
    const int n = imm.parameters();
    if (static_cast<int>(xi.size()) != imm.ambient().dimension() || x.size() != n)
        throw GeometryError("weingarten_split: wrong number of components");
    const Assignment at = Assignment::at_parameters(std::vector<double>(u.data(), u.data() + u.size()));
    Eigen::VectorXcd field(static_cast<Eigen::Index>(xi.size()));
    for (std::size_t k = 0; k < xi.size(); ++k) field(static_cast<Eigen::Index>(k)) = evaluate(xi[k], at);
    const RealTangentVector xi_here{field};
    const double scale = std::max(1e-300, norm(fr.metric, xi_here));
    for (const auto& t : fr.tangents)
        if (std::abs(fr.g(t, xi_here)) > 1e-8 * scale * norm(fr.metric, t))
            throw GeometryError("weingarten_split: field is not normal to the submanifold");

    Eigen::VectorXcd directional = Eigen::VectorXcd::Zero(field.size());
    for (int a = 0; a < n; ++a) {
        for (std::size_t k = 0; k < xi.size(); ++k)
            directional(static_cast<Eigen::Index>(k)) +=
                x(a) * evaluate(wirtinger_derivative(xi[k], {VarKind::u, a + 1}), at);
    }
    const RealTangentVector x_vec = fr.combine(x);
    WeingartenSplit split;
    split.ambient = {directional + fr.christoffel.contract(x_vec.rep, field)};
    split.tangential = fr.tangential_part(split.ambient);
    split.normal = split.ambient - split.tangential;
    return split;
}

/// |{R(T_a,T_b)T_c}^⊥ - (∇̄_{T_a}α)(T_b,T_c) + (∇̄_{T_b}α)(T_a,T_c)|
inline double codazzi_residual_general(const Immersion& imm, const Eigen::VectorXd& u, int a, int b, int c) {
    detail::require_stencil_room(imm, u);
    const FrameAtParameter fr = frame_at(imm, u);
    const int n = fr.parameters();
    const SecondFundamentalForm alpha = detail::second_fundamental_form(imm, fr);
    const std::vector<double> gamma = detail::induced_christoffel(imm, fr);
    auto induced = [&](int d, int i, int j) { return gamma[static_cast<std::size_t>((d * n + i) * n + j)]; };

    // (∇̄_{T_i} α)(T_j, T_c)
    auto covariant = [&](int i, int j) {
        auto field = [&](const Eigen::VectorXd& v) {
            const FrameAtParameter f = frame_at(imm, v);
            return detail::second_fundamental_form(imm, f)(j, c).rep;
        };
        RealTangentVector out = detail::normal_derivative(fr, field, i);
        for (int d = 0; d < n; ++d) out = out - induced(d, i, j) * alpha(d, c) - induced(d, i, c) * alpha(j, d);
        return out;
    };
    const ComplexCurvature r = curvature_at(imm.ambient(), fr.point, fr.metric);
    const RealTangentVector lhs = detail::normal_curvature_term(r, fr, a, b, c);
    const RealTangentVector rhs = covariant(a, b) - covariant(b, a);
    return norm(fr.metric, lhs - rhs);
}

/// D_{T_a} H
inline RealTangentVector mean_curvature_derivative(const Immersion& imm, const FrameAtParameter& fr, int a) {
    auto field = [&](const Eigen::VectorXd& v) { return mean_curvature(imm, v).rep; };
    return detail::normal_derivative(fr, field, a);
}

/// |{R(T_a,T_b)T_c}^⊥ - g(T_b,T_c) D_{T_a}H + g(T_a,T_c) D_{T_b}H| for umbilic immersions.
inline double codazzi_residual_umbilical(const Immersion& imm, const Eigen::VectorXd& u, int a, int b, int c) {
    const double umbilic = umbilical_residual(imm, u);
    if (!(umbilic < 1e-6))
        throw NotUmbilicError("codazzi_residual_umbilical needs an umbilic point (residual " +
                              detail::format_double(umbilic) + ")");
    detail::require_stencil_room(imm, u);
    const FrameAtParameter fr = frame_at(imm, u);
    const ComplexCurvature r = curvature_at(imm.ambient(), fr.point, fr.metric);
    const RealTangentVector lhs = detail::normal_curvature_term(r, fr, a, b, c);
    const RealTangentVector rhs = fr.induced(b, c) * mean_curvature_derivative(imm, fr, a) -
                                  fr.induced(a, c) * mean_curvature_derivative(imm, fr, b);
    return norm(fr.metric, lhs - rhs);
}

/// max |D_X H| over unit X = Σ x_a T_a at u.
inline double parallel_h_at(const Immersion& imm, const Eigen::VectorXd& u, const std::vector<Eigen::VectorXd>& dirs) {
    detail::require_stencil_room(imm, u);
    const FrameAtParameter fr = frame_at(imm, u);
    std::vector<RealTangentVector> dh;
    for (int a = 0; a < fr.parameters(); ++a) dh.push_back(mean_curvature_derivative(imm, fr, a));
    double worst = 0.0;
    for (const auto& x : dirs) {
        const double len = norm(fr.metric, fr.combine(x));
        RealTangentVector d{Eigen::VectorXcd::Zero(fr.point.size())};
        for (int a = 0; a < fr.parameters(); ++a) d.rep += (x(a) / len) * dh[static_cast<std::size_t>(a)].rep;
        worst = std::max(worst, norm(fr.metric, d));
    }
    return worst;
}

/// max |D_X H| over sampled parameter points and unit directions
/// (the coordinate directions plus one random direction per point).
inline double parallel_h_check(const Immersion& imm, int points, Rng& rng) {
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int p = 0; p < points; ++p) {
        const Eigen::VectorXd u = imm.box().sample(rng);
        std::vector<Eigen::VectorXd> dirs;
        for (int a = 0; a < imm.parameters(); ++a) dirs.push_back(Eigen::VectorXd::Unit(imm.parameters(), a));
        Eigen::VectorXd r(imm.parameters());
        for (int a = 0; a < imm.parameters(); ++a) r(a) = normal(rng);
        dirs.push_back(r);
        worst = std::max(worst, parallel_h_at(imm, u, dirs));
    }
    return worst;
}

}  // namespace kahler

#endif  // KAHLER_SUBMANIFOLD_HPP
