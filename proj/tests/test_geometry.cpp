#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "weylscope/error.hpp"
#include "weylscope/geometry.hpp"

#include <Eigen/Dense>

using namespace weylscope;
using namespace testing_support;

namespace {

double gval(const MatrixJets& g, int a, int b) { return g[static_cast<std::size_t>(a * 4 + b)].value(); }

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("flat metric has no curvature") {
    const auto g = euclidean();
    const TensorJet R = riemann(*g, {0.1, 0.2, 0.3, 0.4}, 2);
    for (std::size_t i = 0; i < R.size(); ++i)
        for (double c : R[i].coefficients()) CHECK(c == 0.0);
}

TEST_CASE("christoffel symbols against finite differences of the metric") {
    const auto g = generic_metric();
    const ChartPoint p{0.2, -0.1, 0.3, 0.05};
    const TensorJet G = christoffel(*g, p, 0);
    const MatrixJets gj = metric_jets(*g, p, 1);
    // Independent evaluation: central differences of the metric components.
    const double h = 1e-5;
    std::array<std::array<std::array<double, 4>, 4>, 4> dg{};  // dg[c][a][b]
    for (int c = 0; c < 4; ++c) {
        ChartPoint pp = p, pm = p;
        pp[static_cast<std::size_t>(c)] += h;
        pm[static_cast<std::size_t>(c)] -= h;
        const MatrixJets gp = metric_jets(*g, pp, 0), gm = metric_jets(*g, pm, 0);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) dg[c][a][b] = (gval(gp, a, b) - gval(gm, a, b)) / (2 * h);
    }
    Eigen::Matrix4d gm;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) gm(a, b) = gval(gj, a, b);
    const Eigen::Matrix4d gi = gm.inverse();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c) {
                double s = 0.0;
                for (int d = 0; d < 4; ++d) s += 0.5 * gi(a, d) * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                CHECK(G.at(a, b, c).value() == doctest::Approx(s).epsilon(1e-8).scale(1.0));
            }
}

TEST_CASE("inverse metric is an inverse as jets") {
    const MatrixJets g = metric_jets(*generic_metric(), {0.3, 0.1, -0.2, 0.4}, 3);
    const MatrixJets gi = inverse_metric(g);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            Jet s(3);
            for (int c = 0; c < 4; ++c) fma_into(s, g[static_cast<std::size_t>(a * 4 + c)], gi[static_cast<std::size_t>(c * 4 + b)]);
            for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.taylor(i) == doctest::Approx(i == 0 && a == b ? 1.0 : 0.0).scale(1.0).epsilon(1e-12));
        }
}

TEST_CASE("round sphere has constant curvature one") {
    std::mt19937_64 rng(5);
    const auto g = round_s4();
    for (int t = 0; t < 10; ++t) {
        const ChartPoint p = random_point(rng, -1.5, 1.5);
        const MatrixJets gj = metric_jets(*g, p, 2);
        const TensorJet R = riemann(gj, p, 0);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int c = 0; c < 4; ++c)
                    for (int d = 0; d < 4; ++d) {
                        const double expect = gval(gj, a, c) * gval(gj, b, d) - gval(gj, a, d) * gval(gj, b, c);
                        CHECK(R.at(a, b, c, d).value() == doctest::Approx(expect).scale(1.0).epsilon(1e-10));
                    }
        CHECK(scalar_curvature(R, inverse_metric(truncate(gj, 0))).value() == doctest::Approx(12.0).epsilon(1e-11));
    }
}

TEST_CASE("Fubini-Study is Einstein with Ric = 3g and S2xS2 with Ric = g") {
    std::mt19937_64 rng(6);
    const std::pair<MetricPtr, double> cases[] = {{fubini_study(), 3.0}, {s2xs2(), 1.0}};
    for (const auto& [g, lambda] : cases) {
        for (int t = 0; t < 5; ++t) {
            const ChartPoint p = random_point(rng);
            const MatrixJets gj = metric_jets(*g, p, 2);
            const TensorJet R = riemann(gj, p, 0);
            const MatrixJets ric = ricci(R, inverse_metric(truncate(gj, 0)));
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    CHECK(ric[static_cast<std::size_t>(a * 4 + b)].value() ==
                          doctest::Approx(lambda * gval(gj, a, b)).scale(1.0).epsilon(1e-10));
        }
    }
}

TEST_CASE("curvature symmetries and both Bianchi identities on a generic metric") {
    const auto g = generic_metric();
    const ChartPoint p{0.1, 0.25, -0.3, 0.2};
    const MatrixJets gj = metric_jets(*g, p, 3);
    const TensorJet R = riemann(gj, p, 1);
    const TensorJet G = christoffel(gj, p, 0);
    const TensorJet dR = covariant_derivative(R, G, 0);
    double scale = 0.0;
    for (std::size_t i = 0; i < R.size(); ++i) scale = std::max(scale, std::abs(R[i].value()));
    REQUIRE(scale > 1e-3);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    const double r = R.at(a, b, c, d).value();
                    CHECK(std::abs(r + R.at(b, a, c, d).value()) < 1e-13);
                    CHECK(std::abs(r - R.at(c, d, a, b).value()) < 1e-13);
                    CHECK(std::abs(r + R.at(a, c, d, b).value() + R.at(a, d, b, c).value()) < 1e-12);
                    for (int e = 0; e < 4; ++e) {
                        // nabla_e R_abcd + nabla_c R_abde + nabla_d R_abec = 0
                        const double s = dR.at(e, a, b, c, d).value() + dR.at(c, a, b, d, e).value() +
                                         dR.at(d, a, b, e, c).value();
                        CHECK(std::abs(s) < 1e-11);
                    }
                }
}

TEST_CASE("contracted Bianchi: div Ric = ds/2") {
    const auto g = generic_metric();
    const ChartPoint p{-0.2, 0.1, 0.15, -0.3};
    const MatrixJets gj = metric_jets(*g, p, 3);
    const TensorJet R = riemann(gj, p, 1);
    const MatrixJets gi = inverse_metric(truncate(gj, 1));
    const MatrixJets ric = ricci(R, gi);
    const Jet s = scalar_curvature(R, gi);
    TensorJet Ric({TensorJet::Slot::Down, TensorJet::Slot::Down}, p, 1);
    for (std::size_t i = 0; i < 16; ++i) Ric[i] = ric[i];
    const TensorJet dRic = covariant_derivative(Ric, christoffel(gj, p, 0), 0);
    for (int b = 0; b < 4; ++b) {
        double div = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int c = 0; c < 4; ++c) div += gi[static_cast<std::size_t>(a * 4 + c)].value() * dRic.at(a, c, b).value();
        CHECK(div == doctest::Approx(0.5 * s.partial(b).value()).scale(1.0).epsilon(1e-11));
    }
}

TEST_CASE("stored Kahler form is parallel on Fubini-Study") {
    const auto g = fubini_study();
    const ChartPoint p{0.3, -0.4, 0.2, 0.6};
    const TwoFormJets w = *g->kahler_form(p, 1);
    TensorJet W({TensorJet::Slot::Down, TensorJet::Slot::Down}, p, 1);
    for (std::size_t i = 0; i < 16; ++i) W[i] = w[i];
    const TensorJet dW = covariant_derivative(W, christoffel(*g, p, 0), 0);
    for (std::size_t i = 0; i < dW.size(); ++i) CHECK(std::abs(dW[i].value()) < 1e-13);
}

TEST_CASE("constant conformal change scales curvature") {
    const auto h = fubini_study();
    const auto g = conformal_rescale(h, scalar_from_source("3"));
    const ChartPoint p{0.1, 0.2, 0.3, 0.4};
    ScalarCurvatureField sg(g), sh(h);
    CHECK(sg.jet(p, 0).value() == doctest::Approx(9.0 * sh.jet(p, 0).value()));
    CHECK(sh.jet(p, 0).value() == doctest::Approx(12.0));
}

TEST_CASE("validation errors") {
    const auto g = round_s4();
    CHECK_THROWS_AS(metric_jets(*g, {3.0, 0, 0, 0}, 1), DomainError);
    CHECK_THROWS_AS(metric_jets(*g, {0, 0, 0, 0}, kMaxJetOrder + 1), OrderError);
    CHECK_THROWS_AS(riemann(metric_jets(*g, {0, 0, 0, 0}, 1), {0, 0, 0, 0}, 0), OrderError);
    CHECK_THROWS_AS(components({"-1", "0", "0", "0", "1", "0", "0", "1", "0", "1"}), DomainError);
    CHECK_THROWS_AS(components({"1", "2", "0", "0", "1", "0", "0", "1", "0", "1"}), DomainError);
    CHECK_THROWS_AS(conformal_rescale(g, scalar_from_source("x0"))->components({0, 0, 0, 0}, 0), DomainError);
}

TEST_CASE("metric files") {
    const std::string text = R"json({"kind": "potential", "exprs": ["log(1 + x0^2 + x1^2 + x2^2 + x3^2)"],
                                 "domain": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]], "name": "fs"})json";
    const MetricFile f = MetricFile::parse(text);
    CHECK(f.kind == "potential");
    CHECK(MetricFile::parse(f.dump()).dump() == f.dump());
    const auto g = f.build();
    CHECK(g->provenance() == Provenance::KahlerPotential);
    CHECK_THROWS_AS(MetricFile::parse("{"), InputError);
    CHECK_THROWS_AS(MetricFile::parse(R"({"kind": "potential", "exprs": []})"), InputError);
    CHECK_THROWS_AS(MetricFile::parse(R"({"kind": "spinor", "exprs": ["1"]})"), InputError);
    CHECK_THROWS_AS(MetricFile::parse(R"({"kind": "potential", "exprs": ["x0 +"]})").build(), ParseError);
    CHECK_THROWS_AS(MetricFile::load("/nonexistent/metric.json"), InputError);
}

}  // TEST_SUITE
