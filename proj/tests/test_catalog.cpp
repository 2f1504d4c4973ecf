#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "weylscope/catalog.hpp"
#include "weylscope/error.hpp"
#include "weylscope/verify.hpp"

using namespace weylscope;
using namespace testing_support;

namespace {

ChartPoint sample_in(const Box& b, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(0.0, 1.0);
    ChartPoint p;
    for (int a = 0; a < 4; ++a) {
        const auto& lim = b.bounds[static_cast<std::size_t>(a)];
        // stay off the box faces
        p[static_cast<std::size_t>(a)] = lim[0] + (lim[1] - lim[0]) * (0.05 + 0.9 * d(rng));
    }
    return p;
}

std::vector<std::string> all_names() {
    return {"flat", "round_s4", "s2xs2", "s2xs2_unequal", "s2xs2_unequal:0.5:3", "fubini_study", "fs_perturbed",
            "fs_perturbed:0.03:2"};
}

}  // namespace

TEST_SUITE("catalog") {

TEST_CASE("listing is sorted and complete") {
    const auto entries = list_catalog();
    CHECK(entries.size() >= 6);
    for (std::size_t i = 1; i < entries.size(); ++i) CHECK(entries[i - 1].name < entries[i].name);
    for (const auto& e : entries) {
        CHECK_FALSE(e.description.empty());
        CHECK_FALSE(e.coverage.empty());
        CHECK(e.metric != nullptr);
    }
}

TEST_CASE("unknown names and bad parameters") {
    CHECK_THROWS_AS(catalog_get("nosuch"), InputError);
    CHECK_THROWS_AS(catalog_get("s2xs2_unequal:0:1"), InputError);
    CHECK_THROWS_AS(catalog_get("s2xs2_unequal:1:-2"), InputError);
    CHECK_THROWS_AS(catalog_get("s2xs2_unequal:x:1"), InputError);
    CHECK_THROWS_AS(catalog_get("flat:1"), InputError);
    CHECK_THROWS_AS(catalog_get("fs_perturbed:0.5"), InputError);
    CHECK_THROWS_AS(catalog_get("fs_perturbed:0.01:-3"), InputError);
}

TEST_CASE("canonical names carry the parameters") {
    CHECK(catalog_get("s2xs2_unequal").name == "s2xs2_unequal:1:2");
    CHECK(catalog_get("s2xs2_unequal:0.5:3").name == "s2xs2_unequal:0.5:3");
    CHECK(catalog_get("fs_perturbed").name == "fs_perturbed:0.05:7");
    CHECK(catalog_get("fs_perturbed:0.03:2").name == "fs_perturbed:0.03:2");
    CHECK(catalog_get("fs_perturbed:0.03:2").potential == fs_perturbed_potential(0.03, 2));
    CHECK(fs_perturbed_potential(0.03, 2) != fs_perturbed_potential(0.03, 3));
}

TEST_CASE("ground truth is reproduced at seeded points") {
    for (const auto& name : all_names()) {
        const CatalogEntry e = catalog_get(name);
        INFO(e.name);
        std::mt19937_64 rng(17);
        for (int i = 0; i < 100; ++i) {
            const ChartPoint p = sample_in(e.metric->sample_box(), rng);
            const CurvatureJets c = curvature_jets(*e.metric, p, 0);
            const CurvatureDecomposition d = decomposition_of(c);
            const WeylSpectrum sp = weyl_spectrum(d.wplus);
            if (e.truth.s) CHECK(std::abs(d.s - *e.truth.s) <= 1e-8);
            if (e.truth.wplus) {
                CHECK(std::abs(sp.alpha - (*e.truth.wplus)[0]) <= 1e-8);
                CHECK(std::abs(sp.beta - (*e.truth.wplus)[1]) <= 1e-8);
                CHECK(std::abs(sp.gamma - (*e.truth.wplus)[2]) <= 1e-8);
            }
            if (e.truth.det_sign > 0) CHECK(sp.det > 0.0);
            if (e.truth.det_sign < 0) CHECK(sp.det < 0.0);
            if (e.truth.einstein) {
                REQUIRE(e.truth.einstein_constant);
                const Mat4 ric = values(ricci(c.riemann, c.frame.ginv));
                const Mat4 g = values(c.g);
                CHECK((ric - *e.truth.einstein_constant * g).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, g.norm()));
                CHECK(d.ricci0.norm() <= 1e-8);
            } else if (e.name != "flat") {
                CHECK(d.ricci0.norm() > 1e-6);
            }
        }
    }
}

TEST_CASE("flat entry has no curvature") {
    const CatalogEntry e = catalog_get("flat");
    const CurvatureDecomposition d = decomposition_of(curvature_jets(*e.metric, {0.3, -0.1, 0.2, 0.9}, 0));
    CHECK(d.s == 0.0);
    CHECK(d.wplus.norm() == 0.0);
    CHECK(d.wminus.norm() == 0.0);
    CHECK(d.offdiag.norm() == 0.0);
}

TEST_CASE("Kahler entries have a parallel stored Kahler form") {
    for (const auto& name : all_names()) {
        const CatalogEntry e = catalog_get(name);
        if (!e.truth.kahler) continue;
        INFO(e.name);
        REQUIRE(e.potential);
        std::mt19937_64 rng(23);
        for (int i = 0; i < 10; ++i) {
            const ChartPoint p = sample_in(e.metric->sample_box(), rng);
            const auto w = e.metric->kahler_form(p, 1);
            REQUIRE(w);
            TensorJet W({TensorJet::Slot::Down, TensorJet::Slot::Down}, p, 1);
            for (std::size_t k = 0; k < 16; ++k) W[k] = (*w)[k];
            const TensorJet dW = covariant_derivative(W, christoffel(*e.metric, p, 0), 0);
            double m = 0.0;
            for (std::size_t k = 0; k < dW.size(); ++k) m = std::max(m, std::abs(dW[k].value()));
            CHECK(m <= 1e-8);
        }
    }
}

TEST_CASE("Einstein entries have harmonic W+") {
    for (const auto& e : list_catalog()) {
        if (!e.truth.einstein) continue;
        INFO(e.name);
        std::mt19937_64 rng(29);
        for (int i = 0; i < 10; ++i) CHECK(divergence_weyl(*e.metric, sample_in(e.metric->sample_box(), rng)).relative <= 1e-8);
    }
}

TEST_CASE("perturbed Fubini-Study keeps positive scalar curvature for small eps") {
    for (unsigned seed : {1u, 2u, 3u, 7u, 11u, 42u}) {
        const CatalogEntry e = catalog_get("fs_perturbed:0.05:" + std::to_string(seed));
        INFO(e.name);
        CHECK_FALSE(e.truth.s);
        std::mt19937_64 rng(seed);
        double smin = 1e300, smax = -1e300;
        for (int i = 0; i < 20; ++i) {
            const double s = decomposition_of(curvature_jets(*e.metric, sample_in(e.metric->sample_box(), rng), 0)).s;
            smin = std::min(smin, s);
            smax = std::max(smax, s);
        }
        CHECK(smin > 0.0);
        CHECK(smax - smin > 1e-3);  // genuinely non-constant
    }
}

TEST_CASE("perturbed Fubini-Study potentials are reproducible") {
    const CatalogEntry a = catalog_get("fs_perturbed:0.03:2"), b = catalog_get("fs_perturbed:0.03:2");
    const ChartPoint p{0.2, -0.4, 0.1, 0.3};
    const Mat4 ga = values(metric_jets(*a.metric, p, 0)), gb = values(metric_jets(*b.metric, p, 0));
    CHECK((ga - gb).norm() == 0.0);
}

}  // TEST_SUITE
