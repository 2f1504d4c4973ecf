#include "weylscope/geometry.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "weylscope/error.hpp"

namespace weylscope {

// -------------------------------------------------------------------- Box

Box Box::cube(double lo, double hi) {
    Box b;
    for (auto& r : b.bounds) r = {lo, hi};
    return b;
}

Box Box::whole_space() {
    const double inf = std::numeric_limits<double>::infinity();
    return cube(-inf, inf);
}

bool Box::contains(const ChartPoint& p) const {
    for (int a = 0; a < kDim; ++a) {
        const auto& r = bounds[static_cast<std::size_t>(a)];
        const double x = p[static_cast<std::size_t>(a)];
        if (!std::isfinite(x) || x < r[0] || x > r[1]) return false;
    }
    return true;
}

bool Box::is_finite() const {
    for (const auto& r : bounds)
        if (!std::isfinite(r[0]) || !std::isfinite(r[1])) return false;
    return true;
}

ChartPoint Box::center() const {
    ChartPoint c{};
    for (std::size_t a = 0; a < kDim; ++a) {
        const auto& r = bounds[a];
        c[a] = (std::isfinite(r[0]) && std::isfinite(r[1])) ? 0.5 * (r[0] + r[1]) : 0.0;
    }
    return c;
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::ExplicitComponents: return "explicit-components";
        case Provenance::KahlerPotential: return "kahler-potential";
        case Provenance::ConformalRescale: return "conformal-rescale";
        case Provenance::Derdzinski: return "derdzinski";
    }
    return "unknown";
}

ExpressionScalar::ExpressionScalar(Expression e, std::string source)
    : expr_(std::move(e)), source_(source.empty() ? to_string(expr_) : std::move(source)) {}

ScalarFieldPtr scalar_from_source(const std::string& source) {
    return std::make_shared<ExpressionScalar>(parse_expression(source), source);
}

MetricField::MetricField(std::string name, Box domain, Provenance provenance)
    : name_(std::move(name)),
      domain_(domain),
      sample_box_(domain.is_finite() ? domain : Box::cube(-1.0, 1.0)),
      provenance_(provenance) {}

// ------------------------------------------------------------- utilities

MatrixJets truncate(const MatrixJets& m, int order) {
    MatrixJets r;
    for (std::size_t i = 0; i < 16; ++i) r[i] = m[i].order() > order ? m[i].truncate(order) : m[i];
    return r;
}

std::array<double, 4> leading_minors(const MatrixJets& g) {
    double m[4][4];
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m[a][b] = g[static_cast<std::size_t>(a * 4 + b)].value();
    const double m1 = m[0][0];
    const double m2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const auto det3 = [&](int n0, int n1, int n2) {
        const int r[3] = {n0, n1, n2};
        return m[r[0]][0] * (m[r[1]][1] * m[r[2]][2] - m[r[1]][2] * m[r[2]][1]) -
               m[r[0]][1] * (m[r[1]][0] * m[r[2]][2] - m[r[1]][2] * m[r[2]][0]) +
               m[r[0]][2] * (m[r[1]][0] * m[r[2]][1] - m[r[1]][1] * m[r[2]][0]);
    };
    const double m3 = det3(0, 1, 2);
    // Full determinant by cofactor expansion along the last column.
    double m4 = 0.0;
    for (int i = 0; i < 4; ++i) {
        double sub[3][3];
        for (int r = 0, rr = 0; r < 4; ++r) {
            if (r == i) continue;
            for (int c = 0; c < 3; ++c) sub[rr][c] = m[r][c];
            ++rr;
        }
        const double d = sub[0][0] * (sub[1][1] * sub[2][2] - sub[1][2] * sub[2][1]) -
                         sub[0][1] * (sub[1][0] * sub[2][2] - sub[1][2] * sub[2][0]) +
                         sub[0][2] * (sub[1][0] * sub[2][1] - sub[1][1] * sub[2][0]);
        m4 += ((i + 3) % 2 == 0 ? 1.0 : -1.0) * m[i][3] * d;
    }
    return {m1, m2, m3, m4};
}

MatrixJets metric_jets(const MetricField& g, const ChartPoint& p, int order) {
    if (!g.domain().contains(p)) throw DomainError("point outside the chart domain of " + g.name());
    if (order < 0 || order > g.max_order())
        throw OrderError("metric " + g.name() + " supplies jets up to order " + std::to_string(g.max_order()) +
                         ", requested " + std::to_string(order));
    const auto comps = g.components(p, order);
    MatrixJets m;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) m[static_cast<std::size_t>(a * 4 + b)] = comps[static_cast<std::size_t>(sym_index(a, b))];
    const auto minors = leading_minors(m);
    for (int i = 0; i < 4; ++i) {
        if (!(minors[static_cast<std::size_t>(i)] > 0.0))
            throw DomainError("metric " + g.name() + " is not positive definite: leading minor " +
                              std::to_string(i + 1) + " = " + std::to_string(minors[static_cast<std::size_t>(i)]));
    }
    return m;
}

MatrixJets cholesky_lower(const MatrixJets& g) {
    MatrixJets c;
    const int k = g[0].order();
    for (auto& x : c) x = Jet(k);
    for (int j = 0; j < 4; ++j) {
        Jet d = g[static_cast<std::size_t>(j * 4 + j)];
        for (int m = 0; m < j; ++m) d -= c[static_cast<std::size_t>(j * 4 + m)] * c[static_cast<std::size_t>(j * 4 + m)];
        if (!(d.value() > 0.0)) throw DomainError("metric is not positive definite");
        const Jet cjj = sqrt(d);
        const Jet inv = reciprocal(cjj);
        c[static_cast<std::size_t>(j * 4 + j)] = cjj;
        for (int i = j + 1; i < 4; ++i) {
            Jet s = g[static_cast<std::size_t>(i * 4 + j)];
            for (int m = 0; m < j; ++m) s -= c[static_cast<std::size_t>(i * 4 + m)] * c[static_cast<std::size_t>(j * 4 + m)];
            c[static_cast<std::size_t>(i * 4 + j)] = s * inv;
        }
    }
    return c;
}

MatrixJets lower_inverse(const MatrixJets& c) {
    MatrixJets x;
    const int k = c[0].order();
    for (auto& v : x) v = Jet(k);
    std::array<Jet, 4> inv_diag;
    for (int i = 0; i < 4; ++i) inv_diag[static_cast<std::size_t>(i)] = reciprocal(c[static_cast<std::size_t>(i * 4 + i)]);
    for (int j = 0; j < 4; ++j) {
        x[static_cast<std::size_t>(j * 4 + j)] = inv_diag[static_cast<std::size_t>(j)];
        for (int i = j + 1; i < 4; ++i) {
            Jet s(k);
            for (int m = j; m < i; ++m) fma_into(s, c[static_cast<std::size_t>(i * 4 + m)], x[static_cast<std::size_t>(m * 4 + j)]);
            x[static_cast<std::size_t>(i * 4 + j)] = -(s * inv_diag[static_cast<std::size_t>(i)]);
        }
    }
    return x;
}

MatrixJets inverse_metric(const MatrixJets& g) {
    const MatrixJets x = lower_inverse(cholesky_lower(g));
    // g^-1 = C^-T C^-1
    MatrixJets inv;
    const int k = g[0].order();
    for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
            Jet s(k);
            for (int m = b; m < 4; ++m) fma_into(s, x[static_cast<std::size_t>(m * 4 + a)], x[static_cast<std::size_t>(m * 4 + b)]);
            inv[static_cast<std::size_t>(a * 4 + b)] = s;
            inv[static_cast<std::size_t>(b * 4 + a)] = s;
        }
    }
    return inv;
}

// ---------------------------------------------------------------- tensors

TensorJet::TensorJet(std::vector<Slot> slots, const ChartPoint& p, int order)
    : slots_(std::move(slots)), point_(p), order_(order) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < slots_.size(); ++i) n *= 4;
    comps_.assign(n, Jet(order));
}

std::size_t TensorJet::flatten(std::initializer_list<int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * 4 + static_cast<std::size_t>(i);
    return f;
}

namespace {

using Slot = TensorJet::Slot;

// First-kind symbols G[a][b][c] = 1/2 (d_b g_ac + d_c g_ab - d_a g_bc) at order(g) - 1.
std::vector<Jet> christoffel_first_kind(const MatrixJets& g) {
    std::array<std::array<Jet, 10>, 4> dg;
    for (int c = 0; c < 4; ++c)
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b)
                dg[static_cast<std::size_t>(c)][static_cast<std::size_t>(sym_index(a, b))] =
                    g[static_cast<std::size_t>(a * 4 + b)].partial(c);
    const auto d = [&](int c, int a, int b) -> const Jet& {
        return dg[static_cast<std::size_t>(c)][static_cast<std::size_t>(sym_index(a, b))];
    };
    std::vector<Jet> G(64);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = b; c < 4; ++c) {
                Jet v = (d(b, a, c) + d(c, a, b) - d(a, b, c)) * 0.5;
                G[static_cast<std::size_t>(a * 16 + b * 4 + c)] = v;
                G[static_cast<std::size_t>(a * 16 + c * 4 + b)] = v;
            }
    return G;
}

void require_order(const MatrixJets& g, int needed, const char* what) {
    if (g[0].order() < needed)
        throw OrderError(std::string(what) + " needs metric jets of order " + std::to_string(needed) + ", have " +
                         std::to_string(g[0].order()));
}

}  // namespace

TensorJet christoffel(const MatrixJets& g, const ChartPoint& p, int order) {
    require_order(g, order + 1, "christoffel");
    const std::vector<Jet> G = christoffel_first_kind(truncate(g, order + 1));
    const MatrixJets ginv = inverse_metric(truncate(g, order));
    TensorJet gamma({Slot::Up, Slot::Down, Slot::Down}, p, order);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = b; c < 4; ++c) {
                Jet s(order);
                for (int d = 0; d < 4; ++d)
                    fma_into(s, ginv[static_cast<std::size_t>(a * 4 + d)], G[static_cast<std::size_t>(d * 16 + b * 4 + c)]);
                gamma.at(a, b, c) = s;
                gamma.at(a, c, b) = s;
            }
    return gamma;
}

TensorJet christoffel(const MetricField& g, const ChartPoint& p, int order) {
    return christoffel(metric_jets(g, p, order + 1), p, order);
}

TensorJet riemann(const MatrixJets& g, const ChartPoint& p, int order) {
    require_order(g, order + 2, "riemann");
    const std::vector<Jet> G = christoffel_first_kind(truncate(g, order + 2));  // order k+1
    const MatrixJets ginv = inverse_metric(truncate(g, order));
    // Second-kind symbols at order k.
    std::vector<Jet> up(64);
    for (int e = 0; e < 4; ++e)
        for (int b = 0; b < 4; ++b)
            for (int c = b; c < 4; ++c) {
                Jet s(order);
                for (int a = 0; a < 4; ++a)
                    fma_into(s, ginv[static_cast<std::size_t>(e * 4 + a)], G[static_cast<std::size_t>(a * 16 + b * 4 + c)]);
                up[static_cast<std::size_t>(e * 16 + b * 4 + c)] = s;
                up[static_cast<std::size_t>(e * 16 + c * 4 + b)] = s;
            }
    const auto Gi = [&](int a, int b, int c) -> const Jet& { return G[static_cast<std::size_t>(a * 16 + b * 4 + c)]; };
    const auto Up = [&](int a, int b, int c) -> const Jet& { return up[static_cast<std::size_t>(a * 16 + b * 4 + c)]; };

    TensorJet R({Slot::Down, Slot::Down, Slot::Down, Slot::Down}, p, order);
    constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int P = 0; P < 6; ++P) {
        const int a = pairs[P][0], b = pairs[P][1];
        for (int Q = P; Q < 6; ++Q) {
            const int c = pairs[Q][0], d = pairs[Q][1];
            // R_abcd = d_c G_{a,db} - d_d G_{a,cb} + Gamma^e_cb G_{e,da} - Gamma^e_db G_{e,ca}
            Jet v = Gi(a, d, b).partial(c) - Gi(a, c, b).partial(d);
            for (int e = 0; e < 4; ++e) {
                fma_into(v, Up(e, c, b), Gi(e, d, a));
                fma_into(v, -Up(e, d, b), Gi(e, c, a));
            }
            const Jet nv = -v;
            R.at(a, b, c, d) = v;
            R.at(b, a, c, d) = nv;
            R.at(a, b, d, c) = nv;
            R.at(b, a, d, c) = v;
            R.at(c, d, a, b) = v;
            R.at(d, c, a, b) = nv;
            R.at(c, d, b, a) = nv;
            R.at(d, c, b, a) = v;
        }
    }
    return R;
}

TensorJet riemann(const MetricField& g, const ChartPoint& p, int order) {
    return riemann(metric_jets(g, p, order + 2), p, order);
}

MatrixJets ricci(const TensorJet& R, const MatrixJets& ginv) {
    const int k = std::min(R.order(), ginv[0].order());
    MatrixJets ric;
    for (int b = 0; b < 4; ++b)
        for (int d = b; d < 4; ++d) {
            Jet s(k);
            for (int a = 0; a < 4; ++a)
                for (int c = 0; c < 4; ++c) fma_into(s, ginv[static_cast<std::size_t>(a * 4 + c)], R.at(a, b, c, d));
            ric[static_cast<std::size_t>(b * 4 + d)] = s;
            ric[static_cast<std::size_t>(d * 4 + b)] = s;
        }
    return ric;
}

Jet scalar_curvature(const TensorJet& R, const MatrixJets& ginv) {
    const MatrixJets ric = ricci(R, ginv);
    Jet s(ric[0].order());
    for (std::size_t i = 0; i < 16; ++i) fma_into(s, ginv[i], ric[i]);
    return s;
}

TensorJet covariant_derivative(const TensorJet& T, const TensorJet& gamma, int order) {
    if (T.order() < order + 1)
        throw OrderError("covariant derivative needs the tensor at order " + std::to_string(order + 1));
    if (gamma.order() < order)
        throw OrderError("covariant derivative needs Christoffel symbols at order " + std::to_string(order));
    std::vector<Slot> slots{Slot::Down};
    slots.insert(slots.end(), T.slots().begin(), T.slots().end());
    TensorJet out(slots, T.point(), order);
    const int r = T.rank();
    const std::size_t n = T.size();
    std::vector<std::size_t> stride(static_cast<std::size_t>(r));
    for (int s = r - 1, st = 1; s >= 0; --s, st *= 4) stride[static_cast<std::size_t>(s)] = static_cast<std::size_t>(st);

    for (int e = 0; e < 4; ++e) {
        for (std::size_t flat = 0; flat < n; ++flat) {
            Jet v = T[flat].partial(e);
            if (v.order() > order) v = v.truncate(order);
            for (int s = 0; s < r; ++s) {
                const std::size_t st = stride[static_cast<std::size_t>(s)];
                const int is = static_cast<int>((flat / st) % 4);
                const std::size_t base = flat - static_cast<std::size_t>(is) * st;
                for (int f = 0; f < 4; ++f) {
                    const Jet& tf = T[base + static_cast<std::size_t>(f) * st];
                    if (T.slots()[static_cast<std::size_t>(s)] == Slot::Down) {
                        // - Gamma^f_{e i_s} T_{..f..}
                        fma_into(v, -gamma.at(f, e, is), tf);
                    } else {
                        // + Gamma^{i_s}_{e f} T_{..f..}
                        fma_into(v, gamma.at(is, e, f), tf);
                    }
                }
            }
            out[static_cast<std::size_t>(e) * n + flat] = std::move(v);
        }
    }
    return out;
}

Jet ScalarCurvatureField::jet(const ChartPoint& p, int order) const {
    const MatrixJets g = metric_jets(*g_, p, order + 2);
    const TensorJet R = riemann(g, p, order);
    return scalar_curvature(R, inverse_metric(truncate(g, order)));
}

// ------------------------------------------------------------ metric kinds

namespace {

class ComponentMetric final : public MetricField {
public:
    ComponentMetric(std::array<Expression, 10> exprs, const Box& domain, std::string name)
        : MetricField(std::move(name), domain, Provenance::ExplicitComponents), exprs_(std::move(exprs)) {}

    std::array<Jet, 10> components(const ChartPoint& p, int order) const override {
        std::array<Jet, 10> c;
        for (std::size_t i = 0; i < 10; ++i) c[i] = jet_eval(exprs_[i], p, order);
        return c;
    }
    int max_order() const override { return kMaxJetOrder; }

private:
    std::array<Expression, 10> exprs_;
};

class PotentialMetric final : public MetricField {
public:
    PotentialMetric(Expression phi, const Box& domain, std::string name)
        : MetricField(std::move(name), domain, Provenance::KahlerPotential), phi_(std::move(phi)) {}

    std::array<Jet, 10> components(const ChartPoint& p, int order) const override {
        const Jet phi = jet_eval(phi_, p, order + 2);
        std::array<Jet, 4> d1;
        for (int a = 0; a < 4; ++a) d1[static_cast<std::size_t>(a)] = phi.partial(a);
        std::array<std::array<Jet, 4>, 4> d2;
        for (int a = 0; a < 4; ++a)
            for (int b = a; b < 4; ++b) {
                d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = d1[static_cast<std::size_t>(a)].partial(b);
                d2[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
            }
        const auto H = [&](int a, int b) -> const Jet& { return d2[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
        std::array<Jet, 10> c;
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const int uj = 2 * j, vj = 2 * j + 1, uk = 2 * k, vk = 2 * k + 1;
                const Jet a = (H(uj, uk) + H(vj, vk)) * 0.5;
                const Jet b = (H(uj, vk) - H(vj, uk)) * 0.5;
                c[static_cast<std::size_t>(sym_index(uj, uk))] = a;
                c[static_cast<std::size_t>(sym_index(vj, vk))] = a;
                c[static_cast<std::size_t>(sym_index(uj, vk))] = b;
            }
        return c;
    }

    int max_order() const override { return kMaxJetOrder - 2; }

    std::optional<TwoFormJets> kahler_form(const ChartPoint& p, int order) const override {
        const MatrixJets g = metric_jets(*this, p, order);
        // w_ab = g(J d_a, d_b) with J d_uj = d_vj, J d_vj = -d_uj.
        TwoFormJets w;
        for (int j = 0; j < 2; ++j) {
            const int u = 2 * j, v = 2 * j + 1;
            for (int b = 0; b < 4; ++b) {
                w[static_cast<std::size_t>(u * 4 + b)] = g[static_cast<std::size_t>(v * 4 + b)];
                w[static_cast<std::size_t>(v * 4 + b)] = -g[static_cast<std::size_t>(u * 4 + b)];
            }
        }
        return w;
    }

private:
    Expression phi_;
};

class ConformalMetric final : public MetricField {
public:
    ConformalMetric(MetricPtr h, ScalarFieldPtr f, Provenance provenance, std::string name)
        : MetricField(std::move(name), h->domain(), provenance), h_(std::move(h)), f_(std::move(f)) {
        set_sample_box(h_->sample_box());
    }

    std::array<Jet, 10> components(const ChartPoint& p, int order) const override {
        const Jet f = f_->jet(p, order);
        if (!(f.value() > 0.0))
            throw DomainError("conformal factor is not positive: f = " + std::to_string(f.value()));
        const Jet factor = pow(f, -2);
        auto c = h_->components(p, order);
        for (auto& x : c) x = factor * x;
        return c;
    }

    int max_order() const override { return std::min(h_->max_order(), f_->max_order()); }

private:
    MetricPtr h_;
    ScalarFieldPtr f_;
};

}  // namespace

MetricPtr metric_from_components(const std::array<Expression, 10>& exprs, const Box& domain, std::string name) {
    auto g = std::make_shared<ComponentMetric>(exprs, domain, std::move(name));
    try {
        metric_jets(*g, domain.center(), 0);
    } catch (const DomainError& e) {
        throw DomainError(std::string("metric rejected at domain center: ") + e.what());
    }
    return g;
}

MetricPtr metric_from_kahler_potential(const Expression& phi, const Box& domain, std::string name) {
    auto g = std::make_shared<PotentialMetric>(phi, domain, std::move(name));
    try {
        metric_jets(*g, domain.center(), 0);
    } catch (const DomainError& e) {
        throw DomainError(std::string("complex Hessian of the potential is not positive definite at the domain center: ") +
                          e.what());
    }
    return g;
}

MetricPtr conformal_rescale(MetricPtr h, ScalarFieldPtr f, Provenance provenance, std::string name) {
    if (name.empty()) name = "f^-2 * " + h->name();
    return std::make_shared<ConformalMetric>(std::move(h), std::move(f), provenance, std::move(name));
}

// ---------------------------------------------------------- metric files

MetricFile MetricFile::parse(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(std::string("metric file is not valid JSON: ") + e.what());
    }
    MetricFile f;
    try {
        f.kind = j.at("kind").get<std::string>();
        f.exprs = j.at("exprs").get<std::vector<std::string>>();
        f.name = j.value("name", std::string("unnamed"));
        if (j.contains("domain")) {
            const auto& d = j.at("domain");
            if (!d.is_array() || d.size() != 4) throw InputError("metric file: domain must list four [lo, hi] pairs");
            for (std::size_t a = 0; a < 4; ++a) {
                const auto pair = d[a].get<std::vector<double>>();
                if (pair.size() != 2 || !(pair[0] < pair[1]))
                    throw InputError("metric file: domain entry " + std::to_string(a) + " must be [lo, hi] with lo < hi");
                f.domain.bounds[a] = {pair[0], pair[1]};
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("metric file has the wrong shape: ") + e.what());
    }
    if (f.kind == "components") {
        if (f.exprs.size() != 10)
            throw InputError("metric file: 'components' needs 10 expressions (g_ab with a <= b), got " +
                             std::to_string(f.exprs.size()));
    } else if (f.kind == "potential") {
        if (f.exprs.size() != 1)
            throw InputError("metric file: 'potential' needs exactly one expression, got " + std::to_string(f.exprs.size()));
    } else {
        throw InputError("metric file: kind must be 'components' or 'potential', got '" + f.kind + "'");
    }
    return f;
}

MetricFile MetricFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open metric file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

std::string MetricFile::dump() const {
    nlohmann::ordered_json j;
    j["kind"] = kind;
    j["exprs"] = exprs;
    nlohmann::ordered_json dom = nlohmann::ordered_json::array();
    for (const auto& r : domain.bounds) dom.push_back({r[0], r[1]});
    j["domain"] = dom;
    j["name"] = name;
    return j.dump(2) + "\n";
}

MetricPtr MetricFile::build() const {
    auto parse_at = [&](std::size_t i) {
        try {
            return parse_expression(exprs[i]);
        } catch (const ParseError& e) {
            throw ParseError("expression " + std::to_string(i) + ": " + e.what(), e.offset(), e.expected());
        }
    };
    if (kind == "components") {
        std::array<Expression, 10> ex;
        for (std::size_t i = 0; i < 10; ++i) ex[i] = parse_at(i);
        return metric_from_components(ex, domain, name);
    }
    return metric_from_kahler_potential(parse_at(0), domain, name);
}

}  // namespace weylscope
