#include <gtest/gtest.h>

#include "kahler/checks.hpp"
#include "kahler/models.hpp"

using namespace kahler;

TEST(ModelUri, ParsesSingleModels) {
    const ModelDescriptor d = describe_model("builtin:fs:3:0.5");
    EXPECT_EQ(d.kind, "fs");
    EXPECT_EQ(d.dimension(), 3);
    EXPECT_DOUBLE_EQ(d.scales.at(0), 0.5);
    EXPECT_TRUE(d.bochner_flat);
    EXPECT_TRUE(d.einstein);
    EXPECT_EQ(d.hsc_sign, 1);
    EXPECT_EQ(describe_model("builtin:chyp:2").hsc_sign, -1);
    EXPECT_EQ(describe_model("builtin:flat:4").hsc_sign, 0);
}

TEST(ModelUri, ParsesProducts) {
    const ModelDescriptor d = describe_model("builtin:product:fs:1:fs:2");
    EXPECT_EQ(d.dimension(), 3);
    ASSERT_EQ(d.scales.size(), 2u);
    EXPECT_DOUBLE_EQ(d.scales[0], 1.0);
    EXPECT_DOUBLE_EQ(d.scales[1], 2.0);
    EXPECT_FALSE(d.bochner_flat);
    EXPECT_FALSE(d.einstein);
    EXPECT_FALSE(d.hsc_sign.has_value());

    const ModelDescriptor e = describe_model("builtin:product:fs:1:3:chyp:2:0.5");
    EXPECT_DOUBLE_EQ(e.scales[0], 3.0);
    EXPECT_DOUBLE_EQ(e.scales[1], 0.5);
    EXPECT_EQ(e.factor_kinds[1], "chyp");
}

TEST(ModelUri, RejectsBadUris) {
    for (const char* uri : {"fs:3", "builtin:sphere:2", "builtin:fs:0", "builtin:fs:2:-1", "builtin:fs:2:1:7",
                            "builtin:fs:x", "builtin:product:fs:1", "builtin:chyp:2:0"})
        EXPECT_THROW(describe_model(uri), ModelError) << uri;
}

TEST(ModelUri, ExpectationTableCoversEveryCheck) {
    for (const char* uri : {"builtin:flat:2", "builtin:fs:3", "builtin:product:fs:1:fs:2"}) {
        const ModelDescriptor d = describe_model(uri);
        for (const auto& name : manifold_checks()) EXPECT_TRUE(d.expected_pass.count(name)) << uri << " " << name;
    }
}

TEST(BuildModel, PotentialsAndDomains) {
    const KahlerManifold flat = build_model("builtin:flat:2");
    EXPECT_EQ(unparse(flat.potential()), "((z1 * zb1) + (z2 * zb2))");
    const KahlerManifold chyp = build_model("builtin:chyp:2");
    EXPECT_DOUBLE_EQ(chyp.domain().radii.at(0), 0.9);
    EXPECT_DOUBLE_EQ(build_model("builtin:fs:2").domain().radii.at(0), 1.0);
    EXPECT_DOUBLE_EQ(build_model("builtin:product:fs:1:chyp:1").domain().radii.at(0), 0.9);
    EXPECT_EQ(build_model("builtin:product:fs:1:fs:2").dimension(), 3);
}

TEST(BuildModel, FlatCurvatureVanishes) {
    const KahlerManifold flat = build_model("builtin:flat:2");
    Rng rng(1);
    const ComplexCurvature r = curvature_at(flat, flat.sample_point(rng));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) EXPECT_EQ(std::abs(r(i, j, k, l)), 0.0);
}

// Every builtin's expectation table is reproduced by the suite.
TEST(BuildModel, SuiteReproducesExpectations) {
    for (const char* uri : {"builtin:flat:2", "builtin:flat:3", "builtin:fs:2", "builtin:fs:3", "builtin:chyp:2",
                            "builtin:chyp:3", "builtin:product:fs:1:fs:2", "builtin:product:flat:1:flat:2"}) {
        const ModelDescriptor d = describe_model(uri);
        const SuiteResult suite = run_suite(uri, 1e-8, 11, 3, 40);
        for (const auto& r : suite.reports) EXPECT_EQ(r.pass, d.expected_pass.at(r.check)) << uri << " " << r.check;
        EXPECT_EQ(suite.bochner_flat, d.bochner_flat) << uri;
        EXPECT_EQ(suite.einstein, d.einstein) << uri;
        EXPECT_EQ(suite.constant_hsc, d.hsc_sign.has_value()) << uri;
        if (d.hsc_sign) {
            const int sign = suite.hsc_constant > 1e-9 ? 1 : suite.hsc_constant < -1e-9 ? -1 : 0;
            EXPECT_EQ(sign, *d.hsc_sign) << uri;
        }
    }
}

TEST(BuiltinImmersions, IncludesTheRequiredFixtures) {
    std::set<std::string> names;
    for (const auto& f : builtin_immersions()) names.insert(f.name);
    for (const char* n : {"linear", "sphere", "ellipsoid", "cp1-in-cp2", "real-slice"}) EXPECT_TRUE(names.count(n)) << n;
    EXPECT_EQ(builtin_immersion("builtin:immersion:sphere").name, "sphere");
    EXPECT_THROW(builtin_immersion("torus"), ModelError);
}

TEST(BuiltinImmersions, UnitSphereHasUnitMeanCurvature) {
    const ImmersionFixture f = builtin_immersion("sphere");
    ASSERT_TRUE(f.expect.mean_curvature_norm);
    EXPECT_DOUBLE_EQ(*f.expect.mean_curvature_norm, 1.0);
    const Eigen::Vector2d u(1.0, 3.0);
    EXPECT_NEAR(norm(frame_at(f.immersion, u).metric, mean_curvature(f.immersion, u)), 1.0, 1e-10);
}

TEST(BuiltinImmersions, EllipsoidIsNotUmbilic) {
    EXPECT_GT(umbilical_residual(builtin_immersion("ellipsoid").immersion, Eigen::Vector2d(1.1, 0.6)), 1e-3);
}

// Immersion checks at a finite-difference tolerance reproduce each fixture's table.
TEST(BuiltinImmersions, ChecksReproduceExpectations) {
    for (const auto& f : builtin_immersions()) {
        for (const auto& name : immersion_checks()) {
            RunConfig cfg;
            cfg.immersion = "builtin:immersion:" + f.name;
            cfg.check = name;
            cfg.points = 3;
            cfg.samples = 4;
            cfg.tol = 1e-5;
            cfg.seed = 2;
            bool pass = false;
            try {
                pass = run_immersion_check(cfg, f.immersion).pass;
            } catch (const NotUmbilicError&) {
                pass = false;
            }
            EXPECT_EQ(pass, f.expect.expected_pass.at(name)) << f.name << " " << name;
        }
    }
}
