#pragma once

/**
 * @file geometry.hpp
 * @brief Metric fields on a coordinate chart and their jet-level curvature.
 *
 * Conventions:
 *   R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z,
 *   R^a_bcd d_a = R(d_c, d_d) d_b,  R_abcd = g_ae R^e_bcd,
 *   Ric_bd = R^a_bad,  s = g^bd Ric_bd,
 * so the unit round sphere has R_abcd = g_ac g_bd - g_ad g_bc and s = 12 in
 * dimension four.
 *
 * Every derivative is carried by jets. The order ledger is strict: the
 * Christoffel symbols consume one metric order, the curvature two, and each
 * covariant derivative one more. Asking for more than a field can supply
 * raises OrderError instead of truncating silently.
 */

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weylscope/expression.hpp"
#include "weylscope/jet.hpp"

namespace weylscope {

using ChartPoint = Point4;

/// Closed coordinate box; bounds may be infinite for charts covering R^4.
struct Box {
    std::array<std::array<double, 2>, kDim> bounds;

    static Box cube(double lo, double hi);
    static Box whole_space();

    bool contains(const ChartPoint& p) const;
    bool is_finite() const;
    ChartPoint center() const;
};

enum class Provenance { ExplicitComponents, KahlerPotential, ConformalRescale, Derdzinski };

std::string to_string(Provenance p);

/// 4x4 array of jets, row-major, index a*4+b.
using MatrixJets = std::array<Jet, 16>;

/// A 2-form with coordinate components w_ab = -w_ba, stored as a full 4x4 array.
using TwoFormJets = MatrixJets;

inline constexpr int sym_index(int a, int b) {
    constexpr int table[4][4] = {{0, 1, 2, 3}, {1, 4, 5, 6}, {2, 5, 7, 8}, {3, 6, 8, 9}};
    return table[a][b];
}

/// Scalar field queryable in jets.
class ScalarField {
public:
    virtual ~ScalarField() = default;
    virtual Jet jet(const ChartPoint& p, int order) const = 0;
    virtual int max_order() const = 0;
    virtual std::string describe() const = 0;
};

using ScalarFieldPtr = std::shared_ptr<const ScalarField>;

class ExpressionScalar final : public ScalarField {
public:
    explicit ExpressionScalar(Expression e, std::string source = {});
    Jet jet(const ChartPoint& p, int order) const override { return jet_eval(expr_, p, order); }
    int max_order() const override { return kMaxJetOrder; }
    std::string describe() const override { return source_; }

private:
    Expression expr_;
    std::string source_;
};

ScalarFieldPtr scalar_from_source(const std::string& source);

/**
 * Symmetric metric field g_ab on a chart. Implementations return raw
 * component jets; metric_jets() adds the domain, order and
 * positive-definiteness checks every consumer relies on.
 */
class MetricField {
public:
    MetricField(std::string name, Box domain, Provenance provenance);
    virtual ~MetricField() = default;

    /// Component jets g_ab, a <= b, in sym_index order; no validation.
    virtual std::array<Jet, 10> components(const ChartPoint& p, int order) const = 0;
    virtual int max_order() const = 0;

    /// Stored Kahler form for potential-built metrics.
    virtual std::optional<TwoFormJets> kahler_form(const ChartPoint&, int) const { return std::nullopt; }

    const std::string& name() const noexcept { return name_; }
    const Box& domain() const noexcept { return domain_; }
    Provenance provenance() const noexcept { return provenance_; }

    /// Finite box used for grid scans and random sampling.
    const Box& sample_box() const noexcept { return sample_box_; }
    void set_sample_box(const Box& b) { sample_box_ = b; }

private:
    std::string name_;
    Box domain_;
    Box sample_box_;
    Provenance provenance_;
};

using MetricPtr = std::shared_ptr<const MetricField>;

/// Full 4x4 metric jets at p, validated: p inside the domain, order within
/// budget, and all leading principal minors positive.
MatrixJets metric_jets(const MetricField& g, const ChartPoint& p, int order);

/// Leading principal minors of the value of g; all positive iff positive definite.
std::array<double, 4> leading_minors(const MatrixJets& g);

MetricPtr metric_from_components(const std::array<Expression, 10>& exprs, const Box& domain,
                                 std::string name = "components");

/**
 * Real metric of the Kahler form i ddbar(phi) for the complex structure
 * z1 = x0 + i x1, z2 = x2 + i x3:
 *   g(d_uj, d_uk) = g(d_vj, d_vk) = (phi_ujuk + phi_vjvk) / 2,
 *   g(d_uj, d_vk) = (phi_ujvk - phi_vjuk) / 2,
 * so phi = |z|^2 gives 2 * identity and the Fubini-Study potential
 * log(1 + |z|^2) gives Ric = 3g. The stored Kahler form is w = g(J., .)
 * with J d_u = d_v. Consumes two orders of the potential.
 */
MetricPtr metric_from_kahler_potential(const Expression& phi, const Box& domain,
                                       std::string name = "potential");

/// g = f^-2 h, evaluated lazily in jet arithmetic.
MetricPtr conformal_rescale(MetricPtr h, ScalarFieldPtr f, Provenance provenance = Provenance::ConformalRescale,
                            std::string name = {});

/// A tensor of rank r with 4^r component jets, row-major in its slots.
class TensorJet {
public:
    enum class Slot { Up, Down };

    TensorJet() : point_{}, order_(0) {}
    TensorJet(std::vector<Slot> slots, const ChartPoint& p, int order);

    int rank() const noexcept { return static_cast<int>(slots_.size()); }
    int order() const noexcept { return order_; }
    const ChartPoint& point() const noexcept { return point_; }
    const std::vector<Slot>& slots() const noexcept { return slots_; }

    Jet& operator[](std::size_t flat) { return comps_[flat]; }
    const Jet& operator[](std::size_t flat) const { return comps_[flat]; }
    std::size_t size() const noexcept { return comps_.size(); }

    template <class... I>
    const Jet& at(I... idx) const {
        return comps_[flatten({static_cast<int>(idx)...})];
    }
    template <class... I>
    Jet& at(I... idx) {
        return comps_[flatten({static_cast<int>(idx)...})];
    }

    std::size_t flatten(std::initializer_list<int> idx) const;

private:
    std::vector<Slot> slots_;
    ChartPoint point_;
    int order_;
    std::vector<Jet> comps_;
};

/// Gamma^a_bc at order k from metric jets of order >= k + 1.
TensorJet christoffel(const MatrixJets& g, const ChartPoint& p, int order);
TensorJet christoffel(const MetricField& g, const ChartPoint& p, int order);

/// R_abcd at order k from metric jets of order >= k + 2.
TensorJet riemann(const MatrixJets& g, const ChartPoint& p, int order);
TensorJet riemann(const MetricField& g, const ChartPoint& p, int order);

/// Lower Cholesky factor C with g = C C^T; DomainError unless positive definite.
MatrixJets cholesky_lower(const MatrixJets& g);
/// Inverse of a lower-triangular matrix of jets.
MatrixJets lower_inverse(const MatrixJets& c);

/// Inverse metric at the jets' order (by Cholesky).
MatrixJets inverse_metric(const MatrixJets& g);

MatrixJets truncate(const MatrixJets& m, int order);

/// Ric_bd and s from R_abcd and the inverse metric.
MatrixJets ricci(const TensorJet& R, const MatrixJets& ginv);
Jet scalar_curvature(const TensorJet& R, const MatrixJets& ginv);

/// nabla_e T with the new covariant slot first; T must have order >= k + 1
/// and Gamma order >= k.
TensorJet covariant_derivative(const TensorJet& T, const TensorJet& gamma, int order);

/// Scalar curvature of a metric as a field (consumes two orders).
class ScalarCurvatureField final : public ScalarField {
public:
    explicit ScalarCurvatureField(MetricPtr g) : g_(std::move(g)) {}
    Jet jet(const ChartPoint& p, int order) const override;
    int max_order() const override { return g_->max_order() - 2; }
    std::string describe() const override { return "scalar curvature of " + g_->name(); }

private:
    MetricPtr g_;
};

// ------------------------------------------------------------ metric files

/// On-disk metric description:
///   { "kind": "components"|"potential", "exprs": [...], "domain": [[lo,hi] x4], "name": str }
/// Expression sources are kept verbatim so a load/save cycle is byte-exact
/// for the expressions.
struct MetricFile {
    std::string kind;
    std::vector<std::string> exprs;
    Box domain = Box::cube(-1.0, 1.0);
    std::string name;

    static MetricFile parse(const std::string& json_text);
    static MetricFile load(const std::string& path);
    std::string dump() const;

    MetricPtr build() const;
};

}  // namespace weylscope
