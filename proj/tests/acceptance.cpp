// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weylscope/catalog.hpp"
#include "weylscope/cli.hpp"
#include "weylscope/error.hpp"
#include "weylscope/parallel.hpp"
#include "weylscope/pipeline.hpp"
#include "weylscope/verify.hpp"
#include "weylscope/weyl.hpp"

using namespace weylscope;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
    std::string reasons;
};

void fail(Outcome& o, const std::string& why) {
    o.passed = false;
    if (!o.reasons.empty()) o.reasons += "; ";
    o.reasons += why;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// seeded points in the sample box, 5% away from the faces
std::vector<ChartPoint> points_in(const MetricField& g, int n, std::uint64_t seed) {
    const Box b = g.sample_box();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    std::vector<ChartPoint> pts(static_cast<std::size_t>(n));
    for (auto& p : pts)
        for (std::size_t a = 0; a < 4; ++a) p[a] = b.bounds[a][0] + (b.bounds[a][1] - b.bounds[a][0]) * u(rng);
    return pts;
}

int g_failures = 0;

void run(int id, const std::string& title, double limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        fail(o, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) fail(o, fmt("took longer than %.0f s", limit_s));
    if (!o.passed) ++g_failures;
    if (!o.passed) o.detail += " | failed: " + o.reasons;
    std::printf("%s criterion %d: %s [%.1f s] %s\n", o.passed ? "PASS" : "FAIL", id, title.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
}

const int kThreads = resolve_threads(0);

// points shared by criteria 4, 5 and 7
std::vector<ChartPoint> g_kahler_points;

Outcome spectral_law() {
    Outcome o;
    struct Case {
        const char* name;
        double a, b, det;
    };
    double worst = 0.0;
    for (const Case c : {Case{"fubini_study", 2.0, -1.0, 2.0}, Case{"s2xs2", 2.0 / 3, -1.0 / 3, 2.0 / 27}}) {
        const auto g = catalog_get(c.name).metric;
        for (const auto& p : points_in(*g, 100, 1)) {
            const WeylSpectrum sp = weyl_spectrum(decomposition_of(curvature_jets(*g, p, 0)).wplus);
            const double e = std::max({std::abs(sp.alpha - c.a), std::abs(sp.beta - c.b), std::abs(sp.gamma - c.b),
                                       std::abs(sp.det - c.det)});
            worst = std::max(worst, e);
        }
    }
    if (worst > 1e-8) fail(o, "max deviation " + fmt("%.3g", worst));
    o.detail += "max deviation " + fmt("%.3g", worst);
    return o;
}

Outcome threshold_algebra() {
    Outcome o;
    const OracleReport r = random_spectrum_oracle(42, 1000000, kThreads);
    if (r.samples != 1000000) fail(o, "wrong sample count");
    if (!r.passed()) fail(o, std::to_string(r.counterexamples.size()) + " counterexamples");
    // -(5/21) sqrt(2/21), and diag(4, 1, -5) gives det/|W|^3 = -20 / 42^(3/2)
    const double thr = -(5.0 / 21.0) * std::sqrt(2.0 / 21.0);
    if (std::abs(thr - (-0.0734778)) > 5e-8) fail(o, "threshold constant");
    if (std::abs(det_threshold() - thr) > 1e-15) fail(o, "library threshold " + fmt("%.17g", det_threshold()));
    const double witness = -20.0 / std::pow(42.0, 1.5);
    const ThresholdRecord t = threshold_check(weyl_spectrum(Vec3(4, 1, -5).asDiagonal()));
    const double off = std::max(std::abs(witness - thr), std::abs(t.normalized_det - thr));
    if (off > 1e-12 || !t.boundary) fail(o, "witness off threshold by " + fmt("%.3g", off));
    o.detail += "samples 1e6, sign rule checked " + std::to_string(r.sign_rule_checked) + ", band excluded " +
                std::to_string(r.boundary_excluded) + ", witness offset " + fmt("%.2g", off);
    return o;
}

Outcome normalization() {
    Outcome o;
    double af = 0.0, sg = 0.0;
    std::size_t used = 0, kahler_used = 0;
    PipelineOptions opt;
    opt.with_residual = false;
    opt.threads = kThreads;
    const auto check = [&](const MetricPtr& h, const std::vector<ChartPoint>& pts, bool kahler_g) {
        for (const auto& r : run_pipeline(h, pts, opt).records) {
            if (!r.has_spectrum || r.spectrum.det <= 1e-12) continue;
            if (!r.ok) {
                fail(o, h->name() + ": " + r.error);
                continue;
            }
            ++used;
            af = std::max(af, std::abs(*r.alpha_g * *r.f - 1.0));
            if (kahler_g) {
                ++kahler_used;
                sg = std::max(sg, std::abs(*r.s_g - 6.0 * *r.alpha_g) / std::max(1.0, std::abs(*r.s_g)));
            }
        }
    };
    for (const auto& e : list_catalog()) {
        const auto pts = points_in(*e.metric, 20, 3);
        // constant s Kahler: the rescaled metric is a homothety, hence Kahler
        check(e.metric, pts, e.truth.kahler && e.truth.s.has_value());
        if (e.potential && !(e.truth.s && *e.truth.s <= 0.0)) check(derdzinski(e.metric), pts, true);
    }
    if (used == 0 || kahler_used == 0) fail(o, "no points with det W+ > 0");
    if (af > 1e-8) fail(o, "alpha f defect " + fmt("%.3g", af));
    if (sg > 1e-6) fail(o, "s_g - 6 alpha_g " + fmt("%.3g", sg));
    o.detail += std::to_string(used) + " points, max |alpha f - 1| " + fmt("%.2g", af) + ", max |s_g - 6 alpha_g| " +
                fmt("%.2g", sg) + " over " + std::to_string(kahler_used);
    return o;
}

Outcome derdzinski_forward() {
    Outcome o;
    const auto g = catalog_get("fs_perturbed:0.03:2").metric;
    const auto h = derdzinski(g);
    g_kahler_points = points_in(*g, 100, 4);
    std::vector<double> rel(g_kahler_points.size()), det(g_kahler_points.size());
    parallel_for(g_kahler_points.size(), kThreads, [&](std::size_t i) {
        rel[i] = divergence_weyl(*h, g_kahler_points[i]).relative;
        det[i] = weyl_spectrum(decomposition_of(curvature_jets(*h, g_kahler_points[i], 0)).wplus).det;
    });
    const double worst = *std::max_element(rel.begin(), rel.end());
    const double mindet = *std::min_element(det.begin(), det.end());
    if (worst > 1e-6) fail(o, "delta W+ relative " + fmt("%.3g", worst));
    if (!(mindet > 0.0)) fail(o, "det W+ " + fmt("%.3g", mindet));
    o.detail += "max relative delta W+ " + fmt("%.2g", worst) + ", min det " + fmt("%.3g", mindet);
    return o;
}

Outcome round_trip() {
    Outcome o;
    const auto g = catalog_get("fs_perturbed:0.03:2").metric;
    const RoundTripReport r = roundtrip(g, g_kahler_points, kThreads);
    const double expected = 0.30285343213869;  // 6^(-2/3)
    if (std::abs(r.expected_ratio - expected) > 1e-13) fail(o, "ratio constant " + fmt("%.17g", r.expected_ratio));
    // direct componentwise comparison, independent of the report
    const auto back = rescale_to_g(derdzinski(g));
    double dev = 0.0;
    for (const auto& p : g_kahler_points) {
        const Mat4 a = values(metric_jets(*back, p, 0)), b = values(metric_jets(*g, p, 0));
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (std::abs(b(i, j)) > 1e-8) dev = std::max(dev, std::abs(a(i, j) / b(i, j) - expected));
                else dev = std::max(dev, std::abs(a(i, j)));
    }
    if (r.points.size() != g_kahler_points.size()) fail(o, "missing points");
    if (r.max_deviation > 1e-6 || dev > 1e-6) fail(o, "ratio deviation " + fmt("%.3g", std::max(dev, r.max_deviation)));
    if (r.max_residual > 1e-6) fail(o, "Kahler residual " + fmt("%.3g", r.max_residual));
    o.detail += "max ratio deviation " + fmt("%.2g", std::max(dev, r.max_deviation)) + ", max |nabla w| " +
                fmt("%.2g", r.max_residual);
    return o;
}

Outcome weitzenboeck() {
    Outcome o;
    const auto fs = catalog_get("fubini_study").metric;
    const auto pts = points_in(*fs, 25, 6);
    // non-parallel self-dual form: a non-constant multiple of the Kahler form
    const TwoFormField w = scaled_kahler_form(fs, scalar_from_source("1 + x0^2 + 0.5*x1*x2"));
    const ScalarFieldPtr f = scalar_from_source("1 + 0.1*exp(-(x0^2 + x1^2 + x2^2 + x3^2))");
    const MetricPtr g = conformal_rescale(fs, f);
    std::vector<double> form(pts.size()), weyl(pts.size()), weighted(pts.size());
    std::vector<char> pre(pts.size());
    parallel_for(pts.size(), kThreads, [&](std::size_t i) {
        form[i] = weitzenboeck_form(*fs, w, pts[i]).residual.relative;
        const WeitzenboeckWeylReport r = weitzenboeck_weyl(fs, f, pts[i]);
        weyl[i] = r.residual.relative;
        pre[i] = r.precondition_ok;
        weighted[i] = weighted_divergence(*g, *f, pts[i]).relative;
    });
    const double a = *std::max_element(form.begin(), form.end());
    const double b = *std::max_element(weyl.begin(), weyl.end());
    const double c = *std::max_element(weighted.begin(), weighted.end());
    if (a > 1e-6) fail(o, "form identity " + fmt("%.3g", a));
    if (b > 1e-5) fail(o, "Weyl identity " + fmt("%.3g", b));
    if (std::count(pre.begin(), pre.end(), 0) > 0) fail(o, "source W+ not harmonic");
    if (c > 1e-6) fail(o, "weighted divergence " + fmt("%.3g", c));
    o.detail += "form " + fmt("%.2g", a) + ", Weyl " + fmt("%.2g", b) + ", weighted " + fmt("%.2g", c) + " (25 points)";
    return o;
}

Outcome lemmas() {
    Outcome o;
    const auto g = rescale_to_g(derdzinski(catalog_get("fs_perturbed:0.03:2").metric));
    std::vector<std::vector<LemmaCheck>> all(g_kahler_points.size());
    parallel_for(all.size(), kThreads, [&](std::size_t i) { all[i] = lemma_suite(*g, g_kahler_points[i]); });
    double slack = std::numeric_limits<double>::infinity();
    std::size_t n = 0;
    for (const auto& at : all)
        for (const auto& l : at) {
            if (l.name != "gradient_pairing_nonpositive" && l.name != "gradient_pairing_beta_bound") continue;
            if (!l.applicable) {
                fail(o, l.name + " inapplicable: " + l.note);
                continue;
            }
            ++n;
            slack = std::min(slack, l.slack);
        }
    if (n != 2 * all.size()) fail(o, "missing lemma checks");
    if (slack < -1e-9) fail(o, "slack " + fmt("%.3g", slack));
    const auto fs = catalog_get("fubini_study").metric;
    const ChartPoint p{0.3, -0.2, 0.5, 0.1};
    double eq = std::numeric_limits<double>::infinity();
    for (const auto& l : lemma_suite(*fs, p))
        if (l.name == "norm_lower_bound") eq = std::abs(l.slack);
    const WeylSpectrum sp = weyl_spectrum(decomposition_of(curvature_jets(*fs, p, 0)).wplus);
    const double witness = std::abs(sp.beta + sp.alpha / 2.0);
    if (eq > 1e-9 || witness > 1e-9) fail(o, "norm bound equality off by " + fmt("%.3g", std::max(eq, witness)));
    o.detail += std::to_string(n) + " checks, min slack " + fmt("%.3g", slack) + ", norm bound equality " +
                fmt("%.2g", std::max(eq, witness));
    return o;
}

Outcome quadrature() {
    Outcome o;
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const auto s4 = catalog_get("round_s4").metric;
    const QuadratureEstimate a = integrate(*s4, scalar_curvature_integrand(s4), Box::whole_space(), 1000000, 42, kThreads);
    const double za = std::abs(a.value - 32.0 * pi2) / a.stderr_;
    const auto fs = catalog_get("fubini_study").metric;
    const QuadratureEstimate b = integrate(*fs, signature_integrand(fs), Box::whole_space(), 200000, 43, kThreads);
    const double sig = b.value / (12.0 * pi2), sig_err = b.stderr_ / (12.0 * pi2);
    const double zb = std::abs(sig - 1.0) / sig_err;
    if (!(za <= 3.0)) fail(o, "S^4 z-score " + fmt("%.2f", za));
    if (!(zb <= 3.0)) fail(o, "signature z-score " + fmt("%.2f", zb));
    // the full-contraction norm would land on 4, well separated from 1
    if (!(std::abs(4.0 * sig - 1.0) > 10.0 * 4.0 * sig_err)) fail(o, "norm factor not resolved");
    o.detail += "int s = " + fmt("%.6g", a.value / pi2) + " pi^2 (z " + fmt("%.2f", za) + "), signature " +
                fmt("%.5f", sig) + " +- " + fmt("%.5f", sig_err);
    return o;
}

Outcome determinism() {
    Outcome o;
    std::ostringstream one, eight, err;
    const int c1 = cli::run({"verify", "--suite", "all", "--seed", "42", "--threads", "1"}, one, err);
    const int c8 = cli::run({"verify", "--suite", "all", "--seed", "42", "--threads", "8"}, eight, err);
    if (one.str().empty()) fail(o, "empty report");
    if (one.str() != eight.str()) fail(o, "reports differ");
    if (c1 != c8) fail(o, "exit codes differ");
    o.detail += std::to_string(one.str().size()) + " bytes, exit " + std::to_string(c1);
    return o;
}

}  // namespace

int main() {
    std::printf("threads: %d\n", kThreads);
    run(1, "Kahler spectral law on fubini_study and s2xs2", 10, spectral_law);
    run(2, "eigenvalue and threshold algebra", 30, threshold_algebra);
    run(3, "pipeline normalization on the catalog", 30, normalization);
    // 4, 5 and 7 share a two minute budget each
    run(4, "Derdzinski metric has harmonic W+ and det W+ > 0", 120, derdzinski_forward);
    run(5, "round trip ratio and Kahler residual", 120, round_trip);
    run(6, "Weitzenboeck identities and weighted divergence", 300, weitzenboeck);
    run(7, "lemma inequalities", 120, lemmas);
    run(8, "quadrature anchors", 120, quadrature);
    run(9, "verify reports identical across thread counts", 0, determinism);
    std::printf("%d of 9 criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
