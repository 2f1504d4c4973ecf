#pragma once

/**
 * @file verify.hpp
 * @brief Residuals of the curvature identities, the pointwise lemma
 *        inequalities, a brute-force spectral oracle, and Monte Carlo
 *        quadrature.
 *
 * Every residual is reported with a scale equal to the largest single term
 * of its identity, so relative residuals stay meaningful when the terms
 * nearly cancel.
 */

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "weylscope/geometry.hpp"
#include "weylscope/pipeline.hpp"
#include "weylscope/weyl.hpp"

namespace weylscope {

struct ResidualReport {
    std::string identity;
    ChartPoint point{};
    double residual = 0.0;
    double scale = 0.0;
    double relative = 0.0;  // residual / scale, or residual when scale == 0
};

ResidualReport make_residual(std::string identity, const ChartPoint& p, double residual, double scale);

/// W+ as a 4-index tensor field with chart components, at the given jet order.
TensorJet wplus_tensor(const CurvatureJets& c);

/// (delta W+)_bcd = -g^ae nabla_e W+_abcd; needs metric order 3. The scale is
/// max(|nabla W+|, |W+|^(3/2)); zero (absolute residual) when W+ vanishes.
ResidualReport divergence_weyl(const MetricField& g, const ChartPoint& p, Orientation o = Orientation::Chart);

/// delta_g(f W+_g) for g = f^-2 h; scale max(|f nabla W+|, |df| |W+|, f |W+|^(3/2)).
ResidualReport weighted_divergence(const MetricField& g, const ScalarField& f, const ChartPoint& p,
                                   Orientation o = Orientation::Chart);

/// A 2-form field queried as jets.
using TwoFormField = std::function<TwoFormJets(const ChartPoint&, int order)>;

/// Two-form field from six expressions for the components w01 w02 w03 w12 w13 w23.
TwoFormField two_form_from_expressions(const std::array<Expression, 6>& comps);

/// Stored Kahler form of a potential-built metric, times a scalar field.
TwoFormField scaled_kahler_form(MetricPtr g, ScalarFieldPtr factor);

struct WeitzenboeckFormReport {
    ResidualReport residual;
    double hodge_norm = 0.0;    // |(d + d*)^2 w|
    double rough_norm = 0.0;    // |nabla* nabla w|
    double weyl_norm = 0.0;     // |2 W+(w)|
    double scalar_norm = 0.0;   // |s/3 w|
    double anti_self_dual = 0.0;  // |w-| at p before projection
};

/// (d + d*)^2 w - (nabla* nabla w - 2 W+(w) + s/3 w) for a self-dual w.
/// With project = true the field is replaced by (w + *w)/2 first; otherwise a
/// field with an anti-self-dual part above 1e-8 |w| is rejected. Needs w
/// order 2 and metric order 3.
WeitzenboeckFormReport weitzenboeck_form(const MetricField& g, const TwoFormField& w, const ChartPoint& p,
                                         bool project = false);

struct WeitzenboeckWeylReport {
    ResidualReport residual;       // trace-free 3x3 identity
    ResidualReport precondition;   // delta_h W+ of the source metric
    bool precondition_ok = false;
    Mat3 rough;                    // nabla* nabla (f W+)
    Mat3 algebraic;                // s/2 f W+ - 6 f W+ W+ + 2 f |W+|^2 I
};

/// Residual of nabla*nabla(fW+) + s/2 fW+ - 6 fW+ o W+ + 2 f|W+|^2 I on the
/// trace-free part, computed for g = f^-2 h. The precondition delta_h W+ = 0
/// is evaluated first (relative tolerance precondition_tol) and reported
/// separately; the identity is evaluated either way.
WeitzenboeckWeylReport weitzenboeck_weyl(MetricPtr h, ScalarFieldPtr f, const ChartPoint& p,
                                         double precondition_tol = 1e-7);

struct LemmaCheck {
    std::string name;
    bool applicable = true;
    bool passed = true;
    double slack = 0.0;  // >= 0 when the inequality holds
    std::string note;
};

/// Pointwise checks at p for the metric g itself:
///   gradient_pairing_nonpositive  W+(nabla w, nabla w) <= 0 where det W+ > 0
///   gradient_pairing_beta_bound   W+(nabla w, nabla w) <= beta |nabla w|^2
///   norm_lower_bound              |W+|^2 >= 3/2 alpha^2
///   threshold_equivalence         beta <= alpha/4 iff det W+ >= threshold |W+|^3
///   sign_rule                     det W+ has the sign of -beta
/// Gap failures become inapplicable checks with a note.
std::vector<LemmaCheck> lemma_suite(const MetricField& g, const ChartPoint& p, double tol = 1e-9,
                                    double gap_tol = kDefaultGapTol);

struct OracleCounterexample {
    std::uint64_t index = 0;
    std::string check;
    std::array<double, 3> eigenvalues{};
    double det = 0.0;
};

struct OracleReport {
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t sign_rule_checked = 0;
    std::uint64_t boundary_excluded = 0;
    std::uint64_t zero_band = 0;
    bool monotone = true;   // ratio_function strictly decreasing on the grid
    double max_trace = 0.0;
    double max_norm_identity_defect = 0.0;
    std::vector<OracleCounterexample> counterexamples;  // first few, by index
    bool passed() const { return counterexamples.empty() && monotone; }
};

/// Checks on n random traceless symmetric 3x3 matrices (entries from seeded
/// normal draws in blocks, so the result is independent of the thread count).
OracleReport random_spectrum_oracle(std::uint64_t seed, std::uint64_t n, int threads = 1, double band = 1e-9);

/// The same checks on one given matrix.
OracleReport spectrum_checks(const Mat3& w, double band = 1e-9);

struct QuadratureEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
};

/// Integrand evaluated at a chart point (the volume density is added by integrate).
using Integrand = std::function<double(const ChartPoint&)>;

/// Plain Monte Carlo estimate of the integral of phi dmu_g over a box. An
/// infinite box is mapped from the unit cube by x = tan(pi (u - 1/2)).
/// Throws DomainError on non-finite samples or when a single sample
/// dominates the sum (a sign of a non-integrable singularity).
QuadratureEstimate integrate(const MetricField& g, const Integrand& phi, const Box& box, std::uint64_t samples,
                             std::uint64_t seed, int threads = 1);

/// Integrands used by the quadrature anchors.
Integrand scalar_curvature_integrand(MetricPtr g);
/// (|W+|^2 - |W-|^2) with the operator (Frobenius) norm; tensor_norm = true
/// multiplies by the factor 4 of the full contraction W_abcd W^abcd.
Integrand signature_integrand(MetricPtr g, bool tensor_norm = false);

}  // namespace weylscope
