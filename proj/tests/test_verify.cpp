#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "weylscope/catalog.hpp"
#include "weylscope/error.hpp"
#include "weylscope/verify.hpp"

using namespace weylscope;
using namespace testing_support;

namespace {

ScalarFieldPtr bump_factor() { return scalar_from_source("1 + 0.1*exp(-(x0^2 + x1^2 + x2^2 + x3^2))"); }

TwoFormField kahler_times(MetricPtr g, const std::string& factor) {
    return scaled_kahler_form(std::move(g), scalar_from_source(factor));
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("divergence of W+ vanishes on Einstein metrics") {
    std::mt19937_64 rng(101);
    const auto fs = fubini_study();
    const auto prod = s2xs2();
    for (int i = 0; i < 30; ++i) {
        const ChartPoint p = random_point(rng);
        CHECK(divergence_weyl(*fs, p).relative <= 1e-8);
        CHECK(divergence_weyl(*prod, p).relative <= 1e-8);
    }
    // W+ = 0: absolute residual
    const ResidualReport r = divergence_weyl(*round_s4(), {0.3, -0.2, 0.1, 0.5});
    CHECK(r.scale == 0.0);
    CHECK(r.relative == r.residual);
    CHECK(r.residual < 1e-10);
}

TEST_CASE("conformal change of an Einstein metric is not harmonic but the weighted form is") {
    std::mt19937_64 rng(102);
    const auto fs = fubini_study();
    const auto f = bump_factor();
    const auto g = conformal_rescale(fs, f);
    for (int i = 0; i < 15; ++i) {
        const ChartPoint p = random_point(rng);
        CHECK(divergence_weyl(*g, p).relative > 1e-4);
        CHECK(weighted_divergence(*g, *f, p).relative <= 1e-6);
    }
    const auto prod = s2xs2();
    const auto f2 = scalar_from_source("1 + 0.05*x0^2");
    const auto g2 = conformal_rescale(prod, f2);
    for (int i = 0; i < 15; ++i) CHECK(weighted_divergence(*g2, *f2, random_point(rng, -0.5, 0.5)).relative <= 1e-6);
}

TEST_CASE("weighted divergence with f = 1 reduces to the plain divergence") {
    const auto g = generic_metric();
    const auto one = scalar_from_source("1");
    const ChartPoint p{0.1, -0.3, 0.2, 0.05};
    const ResidualReport a = divergence_weyl(*g, p), b = weighted_divergence(*g, *one, p);
    CHECK(a.residual == b.residual);
    CHECK(a.relative == doctest::Approx(b.relative).epsilon(1e-14));
    CHECK(a.residual > 1e-3);
}

TEST_CASE("Weitzenboeck on self-dual forms: flat space") {
    const auto e = euclidean();
    const auto c = two_form_from_expressions({ex("1"), ex("0"), ex("0"), ex("0"), ex("0"), ex("1")});
    const auto rep = weitzenboeck_form(*e, c, {0.1, 0.2, 0.3, 0.4});
    CHECK(rep.residual.residual < 1e-14);
    CHECK(rep.hodge_norm < 1e-14);
    // Non-constant self-dual form: the Hodge Laplacian equals -sum d^2 w, which
    // checks d* = -*d* against the coordinate divergence.
    const auto w = two_form_from_expressions(
        {ex("x0^2*x1 + sin(x2)"), ex("x3^3 - x0*x1"), ex("exp(x1)*x2"), ex("exp(x1)*x2"), ex("x0*x1 - x3^3"),
         ex("x0^2*x1 + sin(x2)")});
    const auto r2 = weitzenboeck_form(*e, w, {0.3, -0.1, 0.7, 0.2});
    CHECK(r2.hodge_norm > 0.1);
    CHECK(r2.residual.relative < 1e-12);
}

TEST_CASE("Weitzenboeck on self-dual forms: Fubini-Study") {
    const auto fs = fubini_study();
    const auto kf = kahler_times(fs, "1");
    std::mt19937_64 rng(103);
    for (int i = 0; i < 5; ++i) {
        const auto rep = weitzenboeck_form(*fs, kf, random_point(rng));
        CHECK(rep.residual.residual <= 1e-8);
        CHECK(rep.hodge_norm < 1e-8);
        CHECK(rep.weyl_norm == doctest::Approx(rep.scalar_norm));
    }
    const auto nk = kahler_times(fs, "1 + x0^2");
    for (int i = 0; i < 5; ++i) {
        const auto rep = weitzenboeck_form(*fs, nk, random_point(rng), true);
        CHECK(rep.residual.relative <= 1e-6);
        CHECK(rep.hodge_norm > 1e-2);
        CHECK(rep.rough_norm > 1e-2);
    }
}

TEST_CASE("Weitzenboeck on forms rejects anti-self-dual input unless projected") {
    const auto e = euclidean();
    const auto w = two_form_from_expressions({ex("1"), ex("0"), ex("0"), ex("0"), ex("0"), ex("x0")});
    CHECK_THROWS_AS(weitzenboeck_form(*e, w, {0.5, 0, 0, 0}), InputError);
    const auto rep = weitzenboeck_form(*e, w, {0.5, 0, 0, 0}, true);
    CHECK(rep.anti_self_dual > 0.1);
    CHECK(rep.residual.relative < 1e-12);
}

TEST_CASE("Weitzenboeck for W+ closes on Kahler-Einstein metrics") {
    const auto one = scalar_from_source("1");
    std::mt19937_64 rng(104);
    for (const auto& h : {fubini_study(), s2xs2()}) {
        for (int i = 0; i < 3; ++i) {
            const auto rep = weitzenboeck_weyl(h, one, random_point(rng));
            CHECK(rep.precondition_ok);
            CHECK(rep.residual.relative <= 1e-7);
            CHECK(rep.rough.norm() < 1e-7);
            CHECK(rep.algebraic.norm() < 1e-7);  // s/2 W - 6 W^2 + 2|W|^2 balances
            CHECK(rep.residual.scale > 1.0);
        }
    }
}

TEST_CASE("Weitzenboeck for f W+ with a non-constant weight") {
    const auto fs = fubini_study();
    const auto f = bump_factor();
    std::mt19937_64 rng(105);
    for (int i = 0; i < 4; ++i) {
        const auto rep = weitzenboeck_weyl(fs, f, random_point(rng));
        CHECK(rep.precondition_ok);
        CHECK(rep.residual.relative <= 1e-5);
        CHECK(rep.rough.norm() > 1e-3);
    }
}

TEST_CASE("Weitzenboeck for W+ reports a failed precondition separately") {
    const auto fs = fubini_study();
    const auto h = conformal_rescale(fs, bump_factor());
    const auto rep = weitzenboeck_weyl(h, scalar_from_source("1"), {0.2, 0.1, -0.3, 0.4});
    CHECK_FALSE(rep.precondition_ok);
    CHECK(rep.precondition.relative > 1e-4);
}

TEST_CASE("lemma suite on Fubini-Study") {
    const auto checks = lemma_suite(*fubini_study(), {0.3, 0.1, -0.2, 0.4});
    REQUIRE(checks.size() == 5);
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.applicable);
        CHECK(c.passed);
    }
    CHECK(checks[2].name == "norm_lower_bound");
    CHECK(std::abs(checks[2].slack - 2.0 * 0.25 * 0.0) < 1e-9);  // beta + alpha/2 = 0 here
    CHECK(checks[2].note.find("equality") != std::string::npos);
}

TEST_CASE("lemma suite on a round sphere marks gap-dependent checks inapplicable") {
    const auto checks = lemma_suite(*round_s4(), {0.3, 0.1, -0.2, 0.4});
    for (const auto& c : checks) {
        INFO(c.name);
        CHECK(c.passed);
        if (c.name == "gradient_pairing_beta_bound" || c.name == "gradient_pairing_nonpositive" || c.name == "threshold_equivalence") CHECK_FALSE(c.applicable);
    }
}

TEST_CASE("spectral checks on hand-built matrices") {
    // both sides of the threshold equivalence false
    const OracleReport a = spectrum_checks(Vec3(4, 3, -7).asDiagonal());
    CHECK(a.passed());
    CHECK(a.boundary_excluded == 0);
    CHECK(threshold_check(weyl_spectrum(Vec3(4, 3, -7).asDiagonal())).lhs == false);
    // boundary witness
    const OracleReport b = spectrum_checks(Vec3(4, 1, -5).asDiagonal());
    CHECK(b.boundary_excluded == 1);
    CHECK(b.passed());
    // zero band
    const OracleReport c = spectrum_checks(Vec3(1, 0, -1).asDiagonal());
    CHECK(c.zero_band == 1);
    CHECK(c.sign_rule_checked == 0);
}

TEST_CASE("random spectrum oracle") {
    const OracleReport r = random_spectrum_oracle(42, 100000);
    CHECK(r.passed());
    CHECK(r.monotone);
    CHECK(r.sign_rule_checked + r.zero_band == 100000);
    CHECK(r.max_trace < 1e-13);
    CHECK(r.max_norm_identity_defect < 1e-13);
    const OracleReport r3 = random_spectrum_oracle(42, 100000, 3);
    CHECK(r3.sign_rule_checked == r.sign_rule_checked);
    CHECK(r3.boundary_excluded == r.boundary_excluded);
    CHECK(r3.max_trace == r.max_trace);
    CHECK(r3.max_norm_identity_defect == r.max_norm_identity_defect);
    const OracleReport empty = random_spectrum_oracle(1, 0);
    CHECK(empty.passed());
    CHECK(empty.samples == 0);
}

TEST_CASE("quadrature: Euclidean unit box") {
    const auto e = euclidean();
    const Box unit{{{{0, 1}, {0, 1}, {0, 1}, {0, 1}}}};
    const auto est = integrate(*e, [](const ChartPoint&) { return 1.0; }, unit, 5000, 3);
    CHECK(est.value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(est.stderr_ < 1e-14);
    CHECK(est.samples == 5000);
    CHECK(est.seed == 3);
}

TEST_CASE("quadrature: total scalar curvature of the round sphere") {
    const auto s4 = catalog_get("round_s4").metric;
    const auto est = integrate(*s4, scalar_curvature_integrand(s4), Box::whole_space(), 100000, 11);
    const double exact = 32.0 * std::numbers::pi * std::numbers::pi;
    CHECK(std::abs(est.value - exact) <= 3.0 * est.stderr_);
    CHECK(est.stderr_ < 0.02 * exact);
}

TEST_CASE("quadrature: signature of the complex projective plane") {
    const auto fs = catalog_get("fubini_study").metric;
    const double norm = 12.0 * std::numbers::pi * std::numbers::pi;
    const auto op = integrate(*fs, signature_integrand(fs), Box::whole_space(), 50000, 5);
    CHECK(std::abs(op.value / norm - 1.0) <= 3.0 * op.stderr_ / norm);
    const auto tn = integrate(*fs, signature_integrand(fs, true), Box::whole_space(), 50000, 5);
    CHECK(tn.value == doctest::Approx(4.0 * op.value).epsilon(1e-14));
}

TEST_CASE("quadrature converges like 1/sqrt(N) and is thread invariant") {
    const auto fs = catalog_get("fubini_study").metric;
    const auto one = [](const ChartPoint&) { return 1.0; };
    const auto a = integrate(*fs, one, Box::whole_space(), 4000, 9);
    const auto b = integrate(*fs, one, Box::whole_space(), 40000, 9);
    const auto c = integrate(*fs, one, Box::whole_space(), 400000, 9);
    const double vol = 2.0 * std::numbers::pi * std::numbers::pi;
    for (const auto& e : {a, b, c}) CHECK(std::abs(e.value - vol) <= 4.0 * e.stderr_);
    const double r1 = a.stderr_ / b.stderr_, r2 = b.stderr_ / c.stderr_;
    CHECK(r1 > std::sqrt(10.0) / 2.0);
    CHECK(r1 < std::sqrt(10.0) * 2.0);
    CHECK(r2 > std::sqrt(10.0) / 2.0);
    CHECK(r2 < std::sqrt(10.0) * 2.0);
    const auto b4 = integrate(*fs, one, Box::whole_space(), 40000, 9, 4);
    CHECK(b4.value == b.value);
    CHECK(b4.stderr_ == b.stderr_);
}

TEST_CASE("quadrature flags non-integrable blow-ups") {
    const auto e = euclidean();
    const auto phi = [](const ChartPoint& p) {
        const double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
        return 1.0 / std::pow(r2, 8);
    };
    CHECK_THROWS_AS(integrate(*e, phi, Box::cube(-1, 1), 20000, 1), DomainError);
    CHECK_THROWS_AS(integrate(*e, [](const ChartPoint&) { return 1.0; },
                              Box{{{{0, 1}, {0, 1}, {-INFINITY, 1}, {0, 1}}}}, 10, 1),
                    InputError);
}

}  // TEST_SUITE
