#include "weylscope/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weylscope/error.hpp"
#include "weylscope/parallel.hpp"

namespace weylscope {

namespace {

std::size_t u(int i) { return static_cast<std::size_t>(i); }

std::string format_point(const ChartPoint& p) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "(%.6g, %.6g, %.6g, %.6g)", p[0], p[1], p[2], p[3]);
    return buf;
}

}  // namespace

double round_trip_ratio() { return std::pow(6.0, -2.0 / 3.0); }

Jet preferred_factor(const MetricField& h, const ChartPoint& p, int order, double gap_tol, Orientation orientation) {
    const CurvatureJets c = curvature_jets(h, p, order, orientation);
    const TopEigenJets top = top_eigen_jets(c.wplus, curvature_scale(decomposition_of(c)), gap_tol);
    if (!(top.alpha.value() > 0.0))
        throw DomainError("preferred factor needs alpha > 0, got " + std::to_string(top.alpha.value()));
    return pow(top.alpha, -1.0 / 3.0);
}

MetricPtr rescale_to_g(MetricPtr h, double gap_tol, Orientation orientation) {
    const std::string name = "alpha^(2/3) * " + h->name();
    auto f = std::make_shared<PreferredFactorField>(h, gap_tol, orientation);
    return conformal_rescale(std::move(h), std::move(f), Provenance::ConformalRescale, name);
}

KahlerResidual kahler_residual(const MetricField& g, const ChartPoint& p, double gap_tol, Orientation orientation) {
    const MatrixJets gj = metric_jets(g, p, 3);
    const CurvatureJets c = curvature_jets(gj, p, 1, orientation);
    const CurvatureDecomposition dec = decomposition_of(c);
    const TopEigenJets top = top_eigen_jets(c.wplus, curvature_scale(dec), gap_tol);
    const TwoFormJets w = eigenform_jets(c, top);

    TensorJet W({TensorJet::Slot::Down, TensorJet::Slot::Down}, p, 1);
    for (std::size_t i = 0; i < 16; ++i) W[i] = w[i];
    const TensorJet dw = covariant_derivative(W, christoffel(gj, p, 0), 0);

    const Mat4 gi = values(c.frame.ginv);
    // c_eA = <Lambda_A, nabla_e w> = 1/2 Lambda_A^ab nabla_e w_ab
    std::array<Vec3, 4> coef;
    for (int e = 0; e < 4; ++e) {
        Mat4 de;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) de(a, b) = dw.at(e, a, b).value();
        for (int A = 0; A < 3; ++A) coef[u(e)][A] = form_inner(dec.bases.plus[u(A)], de, gi);
    }
    KahlerResidual r;
    r.spectrum = top.spectrum;
    r.alpha = top.spectrum.alpha;
    r.s = dec.s;
    // |nabla w|^2 straight from the definition, and the Lambda+ expansion for the W+ terms.
    double n2 = 0.0;
    for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f) {
            if (gi(e, f) == 0.0) continue;
            Mat4 de, df;
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) {
                    de(a, b) = dw.at(e, a, b).value();
                    df(a, b) = dw.at(f, a, b).value();
                }
            n2 += gi(e, f) * form_inner(de, df, gi);
            r.wplus_term += gi(e, f) * coef[u(e)].dot(dec.wplus * coef[u(f)]);
        }
    r.norm2 = std::max(n2, 0.0);
    r.norm = std::sqrt(r.norm2);
    r.beta_term = top.spectrum.beta * r.norm2;
    return r;
}

std::vector<ChartPoint> grid_points(const Box& box, int n, double margin) {
    std::vector<ChartPoint> pts;
    if (n <= 0) return pts;
    if (!box.is_finite()) throw InputError("grid needs a finite box");
    std::array<std::vector<double>, 4> axis;
    for (int a = 0; a < 4; ++a) {
        const double lo = box.bounds[u(a)][0] + margin, hi = box.bounds[u(a)][1] - margin;
        if (!(lo <= hi)) throw InputError("grid margin leaves an empty box");
        for (int i = 0; i < n; ++i) axis[u(a)].push_back(n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * i / (n - 1));
    }
    pts.reserve(static_cast<std::size_t>(n) * n * n * n);
    for (double x0 : axis[0])
        for (double x1 : axis[1])
            for (double x2 : axis[2])
                for (double x3 : axis[3]) pts.push_back({x0, x1, x2, x3});
    return pts;
}

MetricPtr derdzinski(MetricPtr g_kahler, int scan_grid) {
    if (g_kahler->provenance() != Provenance::KahlerPotential)
        throw InputError("the Derdzinski ansatz needs a metric built from a Kahler potential, got " +
                         to_string(g_kahler->provenance()));
    auto s = std::make_shared<ScalarCurvatureField>(g_kahler);
    for (const ChartPoint& p : grid_points(g_kahler->sample_box(), scan_grid)) {
        const double v = s->jet(p, 0).value();
        if (!(v > 0.0))
            throw DomainError("scalar curvature of " + g_kahler->name() + " is not positive at " + format_point(p) +
                              ": s = " + std::to_string(v));
    }
    return conformal_rescale(g_kahler, s, Provenance::Derdzinski, "s^-2 * " + g_kahler->name());
}

RoundTripReport roundtrip(MetricPtr g_kahler, const std::vector<ChartPoint>& points, int threads, int scan_grid,
                          double gap_tol) {
    const MetricPtr h = derdzinski(g_kahler, scan_grid);
    auto f = std::make_shared<PreferredFactorField>(h, gap_tol);
    const MetricPtr gp = conformal_rescale(h, f, Provenance::ConformalRescale, "round trip of " + g_kahler->name());
    RoundTripReport rep;
    rep.expected_ratio = round_trip_ratio();
    rep.points.resize(points.size());
    parallel_for(points.size(), threads, [&](std::size_t i) {
        const ChartPoint& p = points[i];
        RoundTripPoint& out = rep.points[i];
        out.point = p;
        const Mat4 g0 = values(metric_jets(*g_kahler, p, 0));
        const Mat4 g1 = values(metric_jets(*gp, p, 0));
        const double big = g0.cwiseAbs().maxCoeff();
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) {
                if (std::abs(g0(a, b)) <= 1e-8 * big) {
                    // structurally zero component: compare absolutely
                    out.max_ratio_deviation = std::max(out.max_ratio_deviation, std::abs(g1(a, b)) / big);
                    continue;
                }
                out.max_ratio_deviation =
                    std::max(out.max_ratio_deviation, std::abs(g1(a, b) / g0(a, b) - rep.expected_ratio));
            }
        const KahlerResidual kr = kahler_residual(*gp, p, gap_tol);
        out.kahler_residual = kr.norm;
        out.alpha_f_defect = std::abs(kr.alpha * f->jet(p, 0).value() - 1.0);
    });
    for (const auto& r : rep.points) {
        rep.max_deviation = std::max(rep.max_deviation, r.max_ratio_deviation);
        rep.max_residual = std::max(rep.max_residual, r.kahler_residual);
    }
    return rep;
}

PipelineResult run_pipeline(MetricPtr h, const std::vector<ChartPoint>& points, const PipelineOptions& options) {
    PipelineResult res;
    res.records.resize(points.size());
    const MetricPtr g = rescale_to_g(h, options.gap_tol, options.orientation);
    parallel_for(points.size(), options.threads, [&](std::size_t i) {
        PipelineRecord& r = res.records[i];
        r.point = points[i];
        try {
            const CurvatureDecomposition d =
                decomposition_of(curvature_jets(*h, r.point, 0, options.orientation));
            r.s = d.s;
            r.spectrum = weyl_spectrum(d.wplus);
            r.classification = classify_determinant(r.spectrum);
            if (r.spectrum.norm2 > 0.0) r.threshold = threshold_check(r.spectrum);
            r.has_spectrum = true;
            top_eigenform(d, r.spectrum, {}, options.gap_tol);  // throws on a gap failure
            if (!(r.spectrum.alpha > 0.0)) throw DomainError("top eigenvalue of W+ is not positive");
            r.f = std::pow(r.spectrum.alpha, -1.0 / 3.0);
            const CurvatureDecomposition dg = decomposition_of(curvature_jets(*g, r.point, 0, options.orientation));
            r.alpha_g = weyl_spectrum(dg.wplus).alpha;
            r.s_g = dg.s;
            if (options.with_residual) r.residual = kahler_residual(*g, r.point, options.gap_tol, options.orientation);
            r.ok = true;
        } catch (const DomainError& e) {
            r.ok = false;
            r.error = e.what();
        }
    });

    if (res.records.empty()) {
        res.verdict = "no points";
        return res;
    }
    res.min_det = std::numeric_limits<double>::infinity();
    res.min_gap = std::numeric_limits<double>::infinity();
    bool all_rescaled = true;
    for (const auto& r : res.records) {
        if (r.has_spectrum) {
            res.min_det = std::min(res.min_det, r.spectrum.det);
            res.min_gap = std::min(res.min_gap, r.spectrum.gap);
        }
        if (!r.ok) {
            all_rescaled = false;
            continue;
        }
        if (r.f && r.alpha_g) res.max_alpha_f_defect = std::max(res.max_alpha_f_defect, std::abs(*r.alpha_g * *r.f - 1.0));
        else all_rescaled = false;
        if (r.residual) res.max_residual = std::max(res.max_residual, r.residual->norm);
    }
    if (!all_rescaled)
        res.verdict = "degenerate";
    else if (options.with_residual && res.max_residual > options.kahler_tol)
        res.verdict = "not-kahler";
    else
        res.verdict = "conformally-kahler";
    return res;
}

}  // namespace weylscope
