#include <gtest/gtest.h>

#include <cmath>

#include "kahler/invariants.hpp"
#include "kahler/models.hpp"
#include "kahler/submanifold.hpp"
#include "support/riemann_oracle.hpp"

using namespace kahler;

namespace {

Eigen::VectorXd params(std::initializer_list<double> v) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (double x : v) u(k++) = x;
    return u;
}

std::vector<Expr> components(const std::vector<std::string>& texts, int n) {
    std::vector<Expr> out;
    for (const auto& t : texts) out.push_back(parse_expression(t, n, {VarKind::u}));
    return out;
}

std::shared_ptr<const KahlerManifold> model(const std::string& uri) {
    return std::make_shared<const KahlerManifold>(build_model(uri));
}

ImmersionFixture fixture(const std::string& name) { return builtin_immersion(name); }

double alpha_norm(const Immersion& imm, const Eigen::VectorXd& u) {
    const FrameAtParameter fr = frame_at(imm, u);
    const SecondFundamentalForm alpha = second_fundamental_form(imm, u);
    double worst = 0.0;
    for (const auto& v : alpha.values) worst = std::max(worst, norm(fr.metric, v));
    return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// Frames and induced metric

TEST(InducedMetric, LinearDiscIsTwiceIdentity) {
    const Immersion disc(model("builtin:flat:2"), 2, components({"u1 + i*u2", "0"}, 2),
                         ParameterBox{{-1, -1}, {1, 1}});
    const Eigen::MatrixXd g = induced_metric(disc, params({0.2, -0.3}));
    EXPECT_NEAR((g - 2.0 * Eigen::MatrixXd::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(InducedMetric, SphereIsRoundMetricScaled) {
    for (double r : {0.5, 1.0}) {
        const Immersion s = sphere_immersion(r);
        const double t = 1.1;
        const Eigen::MatrixXd g = induced_metric(s, params({t, 2.0}));
        EXPECT_NEAR(g(0, 0), r * r, 1e-12);
        EXPECT_NEAR(g(1, 1), r * r * std::sin(t) * std::sin(t), 1e-12);
        EXPECT_NEAR(g(0, 1), 0.0, 1e-12);
    }
}

TEST(InducedMetric, SymmetricOnEveryFixture) {
    Rng rng(5);
    for (const auto& f : builtin_immersions()) {
        const Eigen::MatrixXd g = induced_metric(f.immersion, f.immersion.box().sample(rng));
        EXPECT_LT((g - g.transpose()).cwiseAbs().maxCoeff(), 1e-12) << f.name;
        EXPECT_GT(g.llt().matrixL().toDenseMatrix().diagonal().minCoeff(), 0.0) << f.name;
    }
}

TEST(FrameAtParameter, TangentNormalDecompositionIsOrthonormal) {
    Rng rng(6);
    for (const auto& f : builtin_immersions()) {
        const FrameAtParameter fr = frame_at(f.immersion, f.immersion.box().sample(rng));
        const int m = f.immersion.ambient().dimension();
        ASSERT_EQ(static_cast<int>(fr.normals.size()), 2 * m - f.immersion.parameters()) << f.name;
        for (const auto& nu : fr.normals) {
            for (const auto& t : fr.tangents) EXPECT_LT(std::abs(fr.g(t, nu)), 1e-10) << f.name;
        }
        for (std::size_t j = 0; j < fr.normals.size(); ++j)
            for (std::size_t k = 0; k < fr.normals.size(); ++k)
                EXPECT_NEAR(fr.g(fr.normals[j], fr.normals[k]), j == k ? 1.0 : 0.0, 1e-10) << f.name;
    }
}

TEST(FrameAtParameter, RankDeficiencyIsReported) {
    const Immersion degenerate(model("builtin:flat:2"), 2, components({"u1 + i*u1", "0.5*u1"}, 2),
                               ParameterBox{{-1, -1}, {1, 1}});
    EXPECT_THROW(frame_at(degenerate, params({0.1, 0.2})), GeometryError);
}

TEST(FrameAtParameter, ChartExitIsReported) {
    // coordinate radius √2 leaves the unit ball
    const Immersion s = sphere_immersion(2.0);
    EXPECT_THROW(frame_at(s, params({1.0, 1.0})), GeometryError);
}

TEST(Immersion, RejectsMismatchedComponentCount) {
    EXPECT_THROW(Immersion(model("builtin:flat:3"), 2, components({"u1", "u2"}, 2), ParameterBox{{0, 0}, {1, 1}}),
                 GeometryError);
}

TEST(Fixtures, RealSliceTangentPlaneIsAntiholomorphic) {
    Rng rng(7);
    for (const auto& f : builtin_immersions()) {
        if (!f.expect.antiholomorphic) continue;
        const FrameAtParameter fr = frame_at(f.immersion, f.immersion.box().sample(rng));
        for (const auto& a : fr.tangents)
            for (const auto& b : fr.tangents) EXPECT_LT(std::abs(fr.g(a, b.J())), 1e-12) << f.name;
    }
}

// ---------------------------------------------------------------------------
// Second fundamental form and mean curvature

TEST(SecondFundamentalForm, VanishesOnGeodesicFixtures) {
    Rng rng(8);
    for (const auto& f : builtin_immersions()) {
        if (!f.expect.geodesic) continue;
        for (int p = 0; p < 5; ++p)
            EXPECT_LT(alpha_norm(f.immersion, f.immersion.box().sample(rng)), 1e-9) << f.name;
    }
}

TEST(SecondFundamentalForm, SymmetricAndNormal) {
    Rng rng(9);
    for (const auto& f : builtin_immersions()) {
        const Eigen::VectorXd u = f.immersion.box().sample(rng);
        const FrameAtParameter fr = frame_at(f.immersion, u);
        const SecondFundamentalForm alpha = second_fundamental_form(f.immersion, u);
        for (int a = 0; a < alpha.n; ++a)
            for (int b = 0; b < alpha.n; ++b) {
                EXPECT_LT(norm(fr.metric, alpha(a, b) - alpha(b, a)), 1e-9) << f.name;
                for (const auto& t : fr.tangents) EXPECT_LT(std::abs(fr.g(t, alpha(a, b))), 1e-9) << f.name;
            }
        const RealTangentVector h = mean_curvature(f.immersion, u);
        for (const auto& t : fr.tangents) EXPECT_LT(std::abs(fr.g(t, h)), 1e-9) << f.name;
    }
}

// α from the real-coordinate Levi-Civita connection of the oracle:
// normal part of ∂_a∂_b f + Γ(∂_a f, ∂_b f) in 2m real coordinates.
TEST(SecondFundamentalForm, MatchesRealCoordinateOracle) {
    const Immersion& imm = fixture("surface-in-cp2").immersion;
    const Eigen::VectorXd u = params({0.15, -0.2});
    const FrameAtParameter fr = frame_at(imm, u);
    const oracle::RealRiemannOracle ref(imm.ambient(), fr.point);
    const Eigen::MatrixXd g = ref.real_metric();
    const int dim = static_cast<int>(g.rows());
    Eigen::MatrixXd jac(dim, 2);
    for (int a = 0; a < 2; ++a) jac.col(a) = RealTangentVector{imm.tangent(u, a)}.real_components();
    const Eigen::MatrixXd proj_t = jac * (jac.transpose() * g * jac).inverse() * jac.transpose() * g;
    const SecondFundamentalForm alpha = second_fundamental_form(imm, u);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            Eigen::VectorXd w = RealTangentVector{imm.second_derivative(u, a, b)}.real_components();
            for (int k = 0; k < dim; ++k)
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) w(k) += ref.christoffel_symbol(k, i, j) * jac(i, a) * jac(j, b);
            const Eigen::VectorXd expected = w - proj_t * w;
            EXPECT_LT((alpha(a, b).real_components() - expected).norm(), 1e-6) << a << b;
        }
}

TEST(MeanCurvature, SphereHasInverseRadius) {
    Rng rng(10);
    for (double r : {0.5, 1.0}) {
        const Immersion s = sphere_immersion(r);
        for (int p = 0; p < 5; ++p) {
            const Eigen::VectorXd u = s.box().sample(rng);
            const FrameAtParameter fr = frame_at(s, u);
            EXPECT_NEAR(norm(fr.metric, mean_curvature(s, u)), 1.0 / r, 1e-8);
        }
    }
}

TEST(MeanCurvature, DoublingRadiusHalvesH) {
    const Eigen::VectorXd u = params({1.3, 0.7});
    const Immersion small = sphere_immersion(0.5), big = sphere_immersion(1.0);
    const double hs = norm(frame_at(small, u).metric, mean_curvature(small, u));
    const double hb = norm(frame_at(big, u).metric, mean_curvature(big, u));
    EXPECT_NEAR(hb, 0.5 * hs, 1e-9);
}

TEST(MeanCurvature, FixtureNormsMatchExpectations) {
    Rng rng(11);
    for (const auto& f : builtin_immersions()) {
        if (!f.expect.mean_curvature_norm) continue;
        const Eigen::VectorXd u = f.immersion.box().sample(rng);
        EXPECT_NEAR(norm(frame_at(f.immersion, u).metric, mean_curvature(f.immersion, u)),
                    *f.expect.mean_curvature_norm, 1e-8)
            << f.name;
    }
}

TEST(Umbilical, ResidualMatchesFixtureExpectations) {
    Rng rng(12);
    for (const auto& f : builtin_immersions()) {
        const double res = umbilical_residual(f.immersion, f.immersion.box().sample(rng));
        if (f.expect.umbilic)
            EXPECT_LT(res, 1e-8) << f.name;
        else
            EXPECT_GT(res, 1e-3) << f.name;
    }
}

// ---------------------------------------------------------------------------
// Weingarten

TEST(Weingarten, ConstantNormalOnLinearSubspace) {
    const Immersion& imm = fixture("linear").immersion;
    const auto split = weingarten_split(imm, params({0.1, 0.2, -0.1, 0.0}), components({"0", "0", "1"}, 4),
                                        params({0.3, -1.0, 0.5, 2.0}));
    EXPECT_LT(split.tangential.rep.norm(), 1e-14);
    EXPECT_LT(split.normal.rep.norm(), 1e-14);
}

TEST(Weingarten, SphereShapeOperatorIsInverseRadius) {
    // inward unit normal -f/r
    const double r = 1.0;
    const Immersion s = sphere_immersion(r);
    std::vector<Expr> xi;
    for (const auto& c : s.components()) xi.push_back(constant(-1.0 / r) * c);
    const Eigen::VectorXd u = params({1.2, 0.8});
    const FrameAtParameter fr = frame_at(s, u);
    for (const auto& x : {params({1.0, 0.0}), params({0.0, 1.0}), params({0.4, -0.7})}) {
        const auto split = weingarten_split(s, u, xi, x);
        const RealTangentVector ax = -1.0 * split.tangential;
        EXPECT_LT(norm(fr.metric, ax - (1.0 / r) * fr.combine(x)), 1e-10);
        EXPECT_LT(norm(fr.metric, split.normal), 1e-10);
        EXPECT_LT(norm(fr.metric, split.tangential + split.normal - split.ambient), 1e-12);
    }
}

TEST(Weingarten, ShapeOperatorIsSelfAdjointAgainstAlpha) {
    // Euclidean normal of the ellipsoid x²/a² + y²/b² + w²/c² = 1 with (a,b,c) = (0.6, 0.4, 0.25)
    const Immersion& imm = fixture("ellipsoid").immersion;
    const std::string s1 = "(-0.5*i*(exp(i*u1) - exp(-i*u1)))", c1 = "(0.5*(exp(i*u1) + exp(-i*u1)))";
    const std::string s2 = "(-0.5*i*(exp(i*u2) - exp(-i*u2)))", c2 = "(0.5*(exp(i*u2) + exp(-i*u2)))";
    const auto xi = components({s1 + "*" + c2 + "/0.6 + i*" + s1 + "*" + s2 + "/0.4", c1 + "/0.25"}, 2);
    Rng rng(13);
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd u = imm.box().sample(rng);
        const FrameAtParameter fr = frame_at(imm, u);
        const SecondFundamentalForm alpha = second_fundamental_form(imm, u);
        const Eigen::VectorXd x = params({normal(rng), normal(rng)}), y = params({normal(rng), normal(rng)});
        const Assignment at = Assignment::at_parameters({u(0), u(1)});
        const RealTangentVector xi_u{Eigen::Vector2cd(evaluate(xi[0], at), evaluate(xi[1], at))};
        const RealTangentVector ax = -1.0 * weingarten_split(imm, u, xi, x).tangential;
        RealTangentVector axy{Eigen::VectorXcd::Zero(2)};
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) axy.rep += x(a) * y(b) * alpha(a, b).rep;
        EXPECT_NEAR(fr.g(ax, fr.combine(y)), fr.g(axy, xi_u), 1e-7);
    }
}

TEST(Weingarten, SelfAdjointInCurvedAmbient) {
    // J T_1 is a normal field of the Lagrangian real slice of ℂP².
    const Immersion& imm = fixture("rp2-in-cp2").immersion;
    const auto xi = components({"i", "0"}, 2);
    const Eigen::VectorXd u = params({0.2, -0.3});
    const auto split = weingarten_split(imm, u, xi, params({0.5, 1.0}));
    const FrameAtParameter fr = frame_at(imm, u);
    EXPECT_LT(norm(fr.metric, split.tangential), 1e-10);
    EXPECT_LT(norm(fr.metric, split.tangential + split.normal - split.ambient), 1e-12);
}

TEST(Weingarten, RejectsNonNormalField) {
    const Immersion& imm = fixture("linear").immersion;
    EXPECT_THROW(weingarten_split(imm, params({0, 0, 0, 0}), components({"1", "0", "0"}, 4), params({1, 0, 0, 0})),
                 GeometryError);
}

// ---------------------------------------------------------------------------
// Codazzi

TEST(Codazzi, GeneralResidualVanishesOnEveryFixture) {
    Rng rng(14);
    for (const auto& f : builtin_immersions()) {
        const int n = f.immersion.parameters();
        for (int p = 0; p < 5; ++p) {
            const Eigen::VectorXd u = f.immersion.box().sample(rng);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c)
                        EXPECT_LT(codazzi_residual_general(f.immersion, u, a, b, c), 1e-5)
                            << f.name << " " << a << b << c;
        }
    }
}

TEST(Codazzi, CurvedAmbientTermIsNontrivial) {
    const Immersion& imm = fixture("surface-in-cp2").immersion;
    const FrameAtParameter fr = frame_at(imm, params({0.2, 0.1}));
    const ComplexCurvature r = curvature_at(imm.ambient(), fr.point, fr.metric);
    double biggest = 0.0;
    for (int c = 0; c < 2; ++c)
        biggest = std::max(biggest, norm(fr.metric, detail::normal_curvature_term(r, fr, 0, 1, c)));
    EXPECT_GT(biggest, 1e-3);
}

TEST(Codazzi, UmbilicalReductionAgreesWithGeneralForm) {
    Rng rng(15);
    for (const auto& f : builtin_immersions()) {
        if (!f.expect.umbilic) continue;
        const int n = f.immersion.parameters();
        const Eigen::VectorXd u = f.immersion.box().sample(rng);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) {
                    const double um = codazzi_residual_umbilical(f.immersion, u, a, b, c);
                    EXPECT_LT(um, 1e-6) << f.name;
                    EXPECT_LT(std::abs(codazzi_residual_general(f.immersion, u, a, b, c) - um), 1e-5) << f.name;
                }
    }
}

TEST(Codazzi, UmbilicalFormRefusesNonUmbilicPoints) {
    EXPECT_THROW(codazzi_residual_umbilical(fixture("ellipsoid").immersion, params({1.2, 2.0}), 0, 1, 0),
                 NotUmbilicError);
}

TEST(Codazzi, StencilNeedsRoomInsideTheBox) {
    const Immersion& imm = fixture("cp1-in-cp2").immersion;
    EXPECT_THROW(codazzi_residual_general(imm, params({0.5, 0.0}), 0, 1, 0), GeometryError);
}

// x, Jx, y, Jy tangent and z normal to an umbilic submanifold
TEST(Codazzi, HolomorphicPlaneScenario) {
    const Immersion& imm = fixture("linear").immersion;
    const FrameAtParameter fr = frame_at(imm, params({0.1, -0.2, 0.3, 0.05}));
    const PointData pd = point_data(imm.ambient(), fr.point);
    const RealTangentVector x = fr.tangents[0], y = fr.tangents[2];
    ASSERT_LT(norm(fr.metric, x.J() - fr.tangents[1]), 1e-14);
    for (const auto& z : fr.normals) {
        EXPECT_LT(std::abs(pd.r(x, x.J(), y, z)), 1e-10);
        EXPECT_LT(std::abs(pd.r(x, y, x.J(), z)), 1e-10);
    }
}

TEST(Codazzi, HolomorphicPlaneScenarioInProjectiveSpace) {
    const Immersion cp2(model("builtin:fs:3"), 4, components({"u1 + i*u2", "u3 + i*u4", "0"}, 4),
                        ParameterBox{{-0.4, -0.4, -0.4, -0.4}, {0.4, 0.4, 0.4, 0.4}});
    const Eigen::VectorXd u = params({0.1, -0.2, 0.3, 0.05});
    ASSERT_LT(umbilical_residual(cp2, u), 1e-9);
    const FrameAtParameter fr = frame_at(cp2, u);
    const PointData pd = point_data(cp2.ambient(), fr.point);
    const RealTangentVector x = fr.tangents[0], y = fr.tangents[3];
    for (const auto& z : fr.normals) {
        EXPECT_LT(std::abs(pd.r(x, x.J(), y, z)), 1e-10);
        EXPECT_LT(std::abs(pd.r(x, y, x.J(), z)), 1e-10);
    }
}

// ---------------------------------------------------------------------------
// Parallel mean curvature

TEST(ParallelH, SphereAndGeodesicFixtures) {
    Rng rng(16);
    EXPECT_LT(parallel_h_check(fixture("sphere").immersion, 5, rng), 1e-6);
    EXPECT_LT(parallel_h_check(fixture("cp1-in-cp2").immersion, 5, rng), 1e-6);
}

TEST(ParallelH, EllipsoidIsNotParallel) {
    Rng rng(17);
    EXPECT_GT(parallel_h_check(fixture("ellipsoid").immersion, 5, rng), 1e-3);
}

// umbilic in a constant holomorphic sectional curvature ambient => parallel H
TEST(ParallelH, UmbilicFixturesInConstantHscAmbients) {
    Rng rng(18);
    for (const auto& f : builtin_immersions()) {
        if (!f.expect.umbilic) continue;
        EXPECT_LT(parallel_h_check(f.immersion, 5, rng), 1e-5) << f.name;
    }
}

TEST(ParallelH, MatchesFixtureExpectations) {
    Rng rng(19);
    for (const auto& f : builtin_immersions()) {
        const double res = parallel_h_check(f.immersion, 3, rng);
        if (f.expect.parallel_h)
            EXPECT_LT(res, 1e-5) << f.name;
        else
            EXPECT_GT(res, 1e-3) << f.name;
    }
}
