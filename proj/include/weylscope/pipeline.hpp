#pragma once

/**
 * @file pipeline.hpp
 * @brief Conformally-Kahler detection: preferred conformal factor
 *        f = alpha^(-1/3), the rescaled metric g = f^-2 h with alpha_g f = 1,
 *        the Kahler residual |nabla w|, the Derdzinski metric s^-2 g, and the
 *        round trip between them.
 */

#include <optional>
#include <string>
#include <vector>

#include "weylscope/geometry.hpp"
#include "weylscope/weyl.hpp"

namespace weylscope {

inline constexpr double kDefaultGapTol = 1e-7;

/// 6^(-2/3): rescale_to_g(derdzinski(g)) is this multiple of g for Kahler g.
double round_trip_ratio();

/// f = alpha_h^(-1/3) as a jet of the given order at p; consumes two metric
/// orders. Throws DomainError when alpha <= 0 and GapError when the top
/// eigenvalue is not simple.
Jet preferred_factor(const MetricField& h, const ChartPoint& p, int order, double gap_tol = kDefaultGapTol,
                     Orientation orientation = Orientation::Chart);

class PreferredFactorField final : public ScalarField {
public:
    explicit PreferredFactorField(MetricPtr h, double gap_tol = kDefaultGapTol,
                                  Orientation orientation = Orientation::Chart)
        : h_(std::move(h)), gap_tol_(gap_tol), orientation_(orientation) {}
    Jet jet(const ChartPoint& p, int order) const override {
        return preferred_factor(*h_, p, order, gap_tol_, orientation_);
    }
    int max_order() const override { return h_->max_order() - 2; }
    std::string describe() const override { return "alpha^(-1/3) of " + h_->name(); }

private:
    MetricPtr h_;
    double gap_tol_;
    Orientation orientation_;
};

/// g = f^-2 h with f = alpha_h^(-1/3), evaluated lazily.
MetricPtr rescale_to_g(MetricPtr h, double gap_tol = kDefaultGapTol, Orientation orientation = Orientation::Chart);

struct KahlerResidual {
    double norm = 0.0;          // |nabla w|_g
    double norm2 = 0.0;         // 1/2 g^ef g^ac g^bd nabla_e w_ab nabla_f w_cd
    double wplus_term = 0.0;    // W+(nabla w, nabla w)
    double beta_term = 0.0;     // beta |nabla w|^2
    double alpha = 0.0;
    double s = 0.0;
    WeylSpectrum spectrum;
};

/// Covariant derivative of the top eigenform of g at p; needs metric jets of order 3.
KahlerResidual kahler_residual(const MetricField& g, const ChartPoint& p, double gap_tol = kDefaultGapTol,
                              Orientation orientation = Orientation::Chart);

/// Regular grid of n^4 points in a box (n = 1 gives the center); row-major, x3 fastest.
std::vector<ChartPoint> grid_points(const Box& box, int n, double margin = 0.0);

/// h = s^-2 g. The scalar curvature of g is checked positive on an n^4 grid
/// over g's sample box first; throws DomainError naming the first bad point.
MetricPtr derdzinski(MetricPtr g_kahler, int scan_grid = 11);

struct RoundTripPoint {
    ChartPoint point{};
    double max_ratio_deviation = 0.0;  // max over components of |g'_ab/g_ab - 6^(-2/3)|
    double alpha_f_defect = 0.0;       // |alpha_g' f - 1|
    double kahler_residual = 0.0;      // |nabla w| of g'
};

struct RoundTripReport {
    std::vector<RoundTripPoint> points;
    double expected_ratio = 0.0;
    double max_deviation = 0.0;
    double max_residual = 0.0;
};

RoundTripReport roundtrip(MetricPtr g_kahler, const std::vector<ChartPoint>& points, int threads = 1,
                          int scan_grid = 11, double gap_tol = kDefaultGapTol);

struct PipelineRecord {
    ChartPoint point{};
    bool ok = false;
    std::string error;  // set when ok is false
    bool has_spectrum = false;  // curvature evaluated; spectrum fields are valid
    double s = 0.0;
    WeylSpectrum spectrum;
    DeterminantClassification classification;
    std::optional<ThresholdRecord> threshold;
    // rescaled quantities, present when the top eigenvalue is positive and simple
    std::optional<double> f;
    std::optional<double> alpha_g;
    std::optional<double> s_g;
    std::optional<KahlerResidual> residual;  // of g
};

struct PipelineResult {
    std::vector<PipelineRecord> records;
    double min_det = 0.0;
    double min_gap = 0.0;
    double max_residual = 0.0;
    double max_alpha_f_defect = 0.0;
    std::string verdict;  // "conformally-kahler", "not-kahler", "degenerate", "no points"
};

struct PipelineOptions {
    double gap_tol = kDefaultGapTol;
    double kahler_tol = 1e-6;
    bool with_residual = true;
    int threads = 1;
    Orientation orientation = Orientation::Chart;
};

/// Per-point analysis of h: spectrum, classification, threshold, and when
/// possible the rescaled metric's alpha, s and Kahler residual.
PipelineResult run_pipeline(MetricPtr h, const std::vector<ChartPoint>& points, const PipelineOptions& options = {});

}  // namespace weylscope
