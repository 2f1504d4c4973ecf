#include "weylscope/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "weylscope/error.hpp"
#include "weylscope/parallel.hpp"

namespace weylscope {

namespace {

std::size_t u(int i) { return static_cast<std::size_t>(i); }

using Slot = TensorJet::Slot;

int ipow4(int k) { return 1 << (2 * k); }

std::array<int, 6> decode(int flat, int k) {
    std::array<int, 6> idx{};
    for (int s = k - 1; s >= 0; --s) {
        idx[u(s)] = flat % 4;
        flat /= 4;
    }
    return idx;
}

int encode(const int* idx, int k) {
    int f = 0;
    for (int s = 0; s < k; ++s) f = f * 4 + idx[s];
    return f;
}

int levi_civita(const int* p) {
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] == p[j]) return 0;
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] > p[j]) sign = -sign;
    return sign;
}

// Values of a covariant tensor with every index raised by gi.
std::vector<double> raise_values(const std::vector<double>& t, int rank, const Mat4& gi) {
    std::vector<double> cur = t, next(t.size());
    for (int s = 0; s < rank; ++s) {
        const int stride = ipow4(rank - 1 - s);
        for (int flat = 0; flat < static_cast<int>(t.size()); ++flat) {
            const int is = (flat / stride) % 4;
            const int base = flat - is * stride;
            double v = 0.0;
            for (int f = 0; f < 4; ++f) v += gi(is, f) * cur[u(base + f * stride)];
            next[u(flat)] = v;
        }
        std::swap(cur, next);
    }
    return cur;
}

std::vector<double> values_of(const TensorJet& T) {
    std::vector<double> v(T.size());
    for (std::size_t i = 0; i < T.size(); ++i) v[i] = T[i].value();
    return v;
}

// Full contraction T_a.. T^a.. of a covariant tensor.
double tensor_norm(const std::vector<double>& t, int rank, const Mat4& gi) {
    const std::vector<double> up = raise_values(t, rank, gi);
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * up[i];
    return std::sqrt(std::max(s, 0.0));
}

// ------------------------------------------------ differential forms as jets

struct Form {
    int degree = 0;
    std::vector<Jet> c;  // 4^degree components, fully antisymmetric
};

Form raise_form(const Form& w, const MatrixJets& gi) {
    Form cur = w, next = w;
    const int k = w.degree;
    for (int s = 0; s < k; ++s) {
        const int stride = ipow4(k - 1 - s);
        for (int flat = 0; flat < ipow4(k); ++flat) {
            const int is = (flat / stride) % 4;
            const int base = flat - is * stride;
            Jet v = gi[u(is * 4)] * cur.c[u(base)];
            for (int f = 1; f < 4; ++f) fma_into(v, gi[u(is * 4 + f)], cur.c[u(base + f * stride)]);
            next.c[u(flat)] = v;
        }
        std::swap(cur.c, next.c);
    }
    return cur;
}

// (*w)_{b..} = (1/k!) vol eps_{a.. b..} w^{a..}
Form hodge(const Form& w, const MatrixJets& gi, const Jet& vol) {
    const int k = w.degree;
    const Form up = raise_form(w, gi);
    Form out;
    out.degree = 4 - k;
    int order = vol.order();
    for (const Jet& x : up.c) order = std::min(order, x.order());
    out.c.assign(u(ipow4(4 - k)), Jet(order));
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) kfact *= i;
    for (int b = 0; b < ipow4(4 - k); ++b) {
        const auto bi = decode(b, 4 - k);
        Jet acc(order);
        for (int a = 0; a < ipow4(k); ++a) {
            const auto ai = decode(a, k);
            int p[4];
            for (int i = 0; i < k; ++i) p[i] = ai[u(i)];
            for (int i = 0; i < 4 - k; ++i) p[k + i] = bi[u(i)];
            const int e = levi_civita(p);
            if (e > 0)
                acc += up.c[u(a)];
            else if (e < 0)
                acc -= up.c[u(a)];
        }
        out.c[u(b)] = vol * acc * (1.0 / kfact);
    }
    return out;
}

Form exterior_d(const Form& w) {
    const int k = w.degree;
    Form out;
    out.degree = k + 1;
    const int order = w.c[0].order() - 1;
    if (order < 0) throw OrderError("exterior derivative needs a jet of order >= 1");
    out.c.assign(u(ipow4(k + 1)), Jet(order));
    for (int f = 0; f < ipow4(k + 1); ++f) {
        const auto idx = decode(f, k + 1);
        Jet acc(order);
        for (int i = 0; i <= k; ++i) {
            int rest[6];
            for (int j = 0, r = 0; j <= k; ++j)
                if (j != i) rest[r++] = idx[u(j)];
            const Jet d = w.c[u(encode(rest, k))].partial(idx[u(i)]);
            if (i % 2 == 0)
                acc += d;
            else
                acc -= d;
        }
        out.c[u(f)] = acc;
    }
    return out;
}

Form codifferential(const Form& w, const MatrixJets& gi, const Jet& vol) {
    Form r = hodge(exterior_d(hodge(w, gi, vol)), gi, vol);
    for (auto& x : r.c) x = -x;
    return r;
}

Form as_form(const TwoFormJets& w) {
    Form f;
    f.degree = 2;
    f.c.assign(w.begin(), w.end());
    return f;
}

Mat4 form_values(const Form& w) {
    Mat4 m;
    for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = w.c[u(i)].value();
    return m;
}

double form_norm(const Mat4& w, const Mat4& gi) { return std::sqrt(std::max(form_inner(w, w, gi), 0.0)); }

// |W+| times the curvature inverse length |W+|^(1/2): the size nabla W+ would
// have if W+ varied on its own length scale.
double curvature_floor(double wplus_tensor_norm) { return std::pow(wplus_tensor_norm, 1.5); }

// W+ at roundoff level of the curvature: relative residuals are undefined.
bool wplus_negligible(const CurvatureJets& c, double wplus_tensor_norm) {
    return wplus_tensor_norm <= 2e-10 * curvature_scale(decomposition_of(c));
}

}  // namespace

ResidualReport make_residual(std::string identity, const ChartPoint& p, double residual, double scale) {
    ResidualReport r;
    r.identity = std::move(identity);
    r.point = p;
    r.residual = residual;
    r.scale = scale;
    r.relative = scale > 0.0 ? residual / scale : residual;
    return r;
}

TensorJet wplus_tensor(const CurvatureJets& c) { return block_tensor(c.wplus, c.plus, c.point); }

namespace {

// -g^ae T_eabcd for a rank-5 covariant tensor at order 0.
std::vector<double> divergence_values(const TensorJet& dT, const Mat4& gi) {
    std::vector<double> out(64, 0.0);
    for (int e = 0; e < 4; ++e)
        for (int a = 0; a < 4; ++a) {
            const double gea = gi(e, a);
            if (gea == 0.0) continue;
            for (int bcd = 0; bcd < 64; ++bcd) out[u(bcd)] -= gea * dT[u((e * 4 + a) * 64 + bcd)].value();
        }
    return out;
}

}  // namespace

ResidualReport divergence_weyl(const MetricField& g, const ChartPoint& p, Orientation o) {
    const MatrixJets gj = metric_jets(g, p, 3);
    const CurvatureJets c = curvature_jets(gj, p, 1, o);
    const TensorJet W = wplus_tensor(c);
    const TensorJet dW = covariant_derivative(W, christoffel(gj, p, 0), 0);
    const Mat4 gi = values(c.frame.ginv);
    const double res = tensor_norm(divergence_values(dW, gi), 3, gi);
    const double wn = tensor_norm(values_of(W), 4, gi);
    const double dn = tensor_norm(values_of(dW), 5, gi);
    if (wplus_negligible(c, wn)) return make_residual("delta W+", p, res, 0.0);
    return make_residual("delta W+", p, res, std::max(dn, curvature_floor(wn)));
}

ResidualReport weighted_divergence(const MetricField& g, const ScalarField& f, const ChartPoint& p, Orientation o) {
    const MatrixJets gj = metric_jets(g, p, 3);
    const CurvatureJets c = curvature_jets(gj, p, 1, o);
    const TensorJet W = wplus_tensor(c);
    const Jet fj = f.jet(p, 1);
    TensorJet F = W;
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = fj * W[i];
    const TensorJet gamma = christoffel(gj, p, 0);
    const TensorJet dF = covariant_derivative(F, gamma, 0);
    const Mat4 gi = values(c.frame.ginv);
    const double res = tensor_norm(divergence_values(dF, gi), 3, gi);
    const double wn = tensor_norm(values_of(W), 4, gi);
    const double dwn = tensor_norm(values_of(covariant_derivative(W, gamma, 0)), 5, gi);
    Eigen::Vector4d df;
    for (int a = 0; a < 4; ++a) df[a] = fj.partial(a).value();
    const double dfn = std::sqrt(std::max(df.dot(gi * df), 0.0));
    const double fv = std::abs(fj.value());
    const double scale = wplus_negligible(c, wn) ? 0.0 : std::max({fv * dwn, dfn * wn, fv * curvature_floor(wn)});
    return make_residual("delta (f W+)", p, res, scale);
}

TwoFormField two_form_from_expressions(const std::array<Expression, 6>& comps) {
    return [comps](const ChartPoint& p, int order) {
        constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
        TwoFormJets w;
        for (auto& x : w) x = Jet(order);
        for (int P = 0; P < 6; ++P) {
            const Jet v = jet_eval(comps[u(P)], p, order);
            w[u(pairs[P][0] * 4 + pairs[P][1])] = v;
            w[u(pairs[P][1] * 4 + pairs[P][0])] = -v;
        }
        return w;
    };
}

TwoFormField scaled_kahler_form(MetricPtr g, ScalarFieldPtr factor) {
    if (!g->kahler_form(g->sample_box().center(), 0))
        throw InputError("metric " + g->name() + " has no stored Kahler form");
    return [g, factor](const ChartPoint& p, int order) {
        TwoFormJets w = *g->kahler_form(p, order);
        const Jet f = factor->jet(p, order);
        for (auto& x : w) x = f * x;
        return w;
    };
}

WeitzenboeckFormReport weitzenboeck_form(const MetricField& g, const TwoFormField& wf, const ChartPoint& p,
                                         bool project) {
    const MatrixJets gj = metric_jets(g, p, 3);
    const MatrixJets g2 = truncate(gj, 2);
    const MatrixJets gi = inverse_metric(g2);
    const FrameJets frame = orthonormal_frame(g2);
    const Jet& vol = frame.volume;

    Form w = as_form(wf(p, 2));
    const Form sw = hodge(w, gi, vol);
    Mat4 asd = Mat4::Zero();
    for (int i = 0; i < 16; ++i) asd(i / 4, i % 4) = 0.5 * (w.c[u(i)].value() - sw.c[u(i)].value());
    const Mat4 giv = values(gi);
    WeitzenboeckFormReport rep;
    rep.anti_self_dual = form_norm(asd, giv);
    if (project) {
        for (std::size_t i = 0; i < 16; ++i) w.c[i] = (w.c[i] + sw.c[i]) * 0.5;
    } else if (rep.anti_self_dual > 1e-8 * std::max(form_norm(form_values(w), giv), 1e-300)) {
        throw InputError("weitzenboeck_form: the 2-form has an anti-self-dual part of norm " +
                         std::to_string(rep.anti_self_dual) + "; project it first");
    }

    // Hodge Laplacian d d* + d* d.
    const Form dstar = codifferential(w, gi, vol);                  // 1-form, order 1
    const Form lap1 = exterior_d(dstar);                            // order 0
    const Form lap2 = codifferential(exterior_d(w), gi, vol);       // order 0
    Mat4 hodge_lap;
    for (int i = 0; i < 16; ++i) hodge_lap(i / 4, i % 4) = lap1.c[u(i)].value() + lap2.c[u(i)].value();

    // Rough Laplacian -g^ef nabla_e nabla_f w.
    TensorJet W({Slot::Down, Slot::Down}, p, 2);
    for (std::size_t i = 0; i < 16; ++i) W[i] = w.c[i];
    const TensorJet gamma = christoffel(gj, p, 1);
    const TensorJet dW = covariant_derivative(W, gamma, 1);
    TensorJet gamma0({Slot::Up, Slot::Down, Slot::Down}, p, 0);
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma0[i] = gamma[i].truncate(0);
    const TensorJet ddW = covariant_derivative(dW, gamma0, 0);
    Mat4 rough = Mat4::Zero();
    for (int e = 0; e < 4; ++e)
        for (int f = 0; f < 4; ++f)
            for (int ab = 0; ab < 16; ++ab) rough(ab / 4, ab % 4) -= giv(e, f) * ddW[u((e * 4 + f) * 16 + ab)].value();

    // Curvature terms.
    const CurvatureDecomposition dec = decomposition_of(curvature_jets(gj, p, 0));
    const Mat4 wv = form_values(w);
    Vec3 coef;
    for (int A = 0; A < 3; ++A) coef[A] = form_inner(dec.bases.plus[u(A)], wv, giv);
    const Vec3 image = dec.wplus * coef;
    Mat4 wplus_w = Mat4::Zero();
    for (int A = 0; A < 3; ++A) wplus_w += image[A] * dec.bases.plus[u(A)];
    const Mat4 scalar_term = (dec.s / 3.0) * wv;

    const Mat4 residual = hodge_lap - (rough - 2.0 * wplus_w + scalar_term);
    rep.hodge_norm = form_norm(hodge_lap, giv);
    rep.rough_norm = form_norm(rough, giv);
    rep.weyl_norm = form_norm(2.0 * wplus_w, giv);
    rep.scalar_norm = form_norm(scalar_term, giv);
    const double scale = std::max({rep.hodge_norm, rep.rough_norm, rep.weyl_norm, rep.scalar_norm});
    rep.residual = make_residual("hodge laplacian on self-dual forms", p, form_norm(residual, giv), scale);
    return rep;
}

WeitzenboeckWeylReport weitzenboeck_weyl(MetricPtr h, ScalarFieldPtr f, const ChartPoint& p, double precondition_tol) {
    WeitzenboeckWeylReport rep;
    rep.precondition = divergence_weyl(*h, p);
    rep.precondition_ok = rep.precondition.relative <= precondition_tol;

    const MetricPtr g = conformal_rescale(h, f);
    const MatrixJets gj = metric_jets(*g, p, 4);
    const CurvatureJets c = curvature_jets(gj, p, 2);
    const TensorJet W = wplus_tensor(c);
    const Jet fj = f->jet(p, 2);
    TensorJet F = W;
    for (std::size_t i = 0; i < F.size(); ++i) F[i] = fj * W[i];
    const TensorJet gamma = christoffel(gj, p, 1);
    const TensorJet dF = covariant_derivative(F, gamma, 1);
    TensorJet gamma0({Slot::Up, Slot::Down, Slot::Down}, p, 0);
    for (std::size_t i = 0; i < gamma.size(); ++i) gamma0[i] = gamma[i].truncate(0);
    const TensorJet ddF = covariant_derivative(dF, gamma0, 0);

    const Mat4 gi = values(c.frame.ginv);
    std::vector<double> rough(256, 0.0);
    for (int e = 0; e < 4; ++e)
        for (int ff = 0; ff < 4; ++ff) {
            const double gef = gi(e, ff);
            if (gef == 0.0) continue;
            for (int abcd = 0; abcd < 256; ++abcd) rough[u(abcd)] -= gef * ddF[u((e * 4 + ff) * 256 + abcd)].value();
        }
    // X_AB = 1/4 Lambda_A^ab Lambda_B^cd rough_abcd
    std::array<Mat4, 3> up;
    for (int A = 0; A < 3; ++A) up[u(A)] = gi * values(c.plus[u(A)]) * gi;
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) {
            double s = 0.0;
            for (int ab = 0; ab < 16; ++ab) {
                const double la = up[u(A)](ab / 4, ab % 4);
                if (la == 0.0) continue;
                for (int cd = 0; cd < 16; ++cd) s += la * up[u(B)](cd / 4, cd % 4) * rough[u(ab * 16 + cd)];
            }
            rep.rough(A, B) = 0.25 * s;
        }

    const Mat3 w = values(c.wplus);
    const double fv = fj.value();
    const double sv = c.s.value();
    const Mat3 t1 = 0.5 * sv * fv * w;
    const Mat3 t2 = -6.0 * fv * w * w;
    const Mat3 t3 = 2.0 * fv * w.squaredNorm() * Mat3::Identity();
    rep.algebraic = t1 + t2 + t3;
    Mat3 total = rep.rough + rep.algebraic;
    total -= (total.trace() / 3.0) * Mat3::Identity();
    const double scale = std::max({rep.rough.norm(), t1.norm(), t2.norm(), t3.norm()});
    rep.residual = make_residual("weitzenboeck for f W+", p, total.norm(), scale);
    return rep;
}

std::vector<LemmaCheck> lemma_suite(const MetricField& g, const ChartPoint& p, double tol, double gap_tol) {
    const CurvatureDecomposition dec = decomposition_of(curvature_jets(g, p, 0));
    const WeylSpectrum sp = weyl_spectrum(dec.wplus);
    const DeterminantClassification cls = classify_determinant(sp);
    std::vector<LemmaCheck> out;

    std::optional<KahlerResidual> kr;
    std::string gap_note;
    try {
        kr = kahler_residual(g, p, gap_tol);
    } catch (const GapError& e) {
        gap_note = e.what();
    }
    const double wscale = std::sqrt(sp.norm2);
    {
        LemmaCheck c;
        c.name = "gradient_pairing_nonpositive";
        if (cls.cls != DeterminantClass::Positive) {
            c.applicable = false;
            c.note = "det W+ is not positive";
        } else if (!kr) {
            c.applicable = false;
            c.note = gap_note;
        } else {
            c.slack = -kr->wplus_term;
            c.passed = c.slack >= -tol * std::max(1.0, wscale * kr->norm2);
        }
        out.push_back(c);
    }
    {
        LemmaCheck c;
        c.name = "gradient_pairing_beta_bound";
        if (!kr) {
            c.applicable = false;
            c.note = gap_note;
        } else {
            c.slack = kr->beta_term - kr->wplus_term;
            c.passed = c.slack >= -tol * std::max(1.0, wscale * kr->norm2);
        }
        out.push_back(c);
    }
    {
        LemmaCheck c;
        c.name = "norm_lower_bound";
        const double a = sp.alpha, b = sp.beta;
        c.slack = sp.norm2 - 1.5 * a * a;
        const double identity = std::abs(sp.norm2 - (1.5 * a * a + 2.0 * (b + 0.5 * a) * (b + 0.5 * a)));
        c.passed = c.slack >= -tol * std::max(1.0, sp.norm2) && identity <= 1e-12 * std::max(1.0, sp.norm2);
        if (std::abs(b + 0.5 * a) <= 1e-9 * std::max(1.0, wscale)) c.note = "equality case beta = -alpha/2";
        out.push_back(c);
    }
    {
        LemmaCheck c;
        c.name = "threshold_equivalence";
        if (sp.norm2 == 0.0 || std::sqrt(sp.norm2) <= 1e-10 * curvature_scale(dec)) {
            c.applicable = false;
            c.note = "W+ = 0";
        } else {
            const ThresholdRecord t = threshold_check(sp);
            c.slack = t.normalized_det - det_threshold();
            c.passed = t.agree || t.boundary;
            if (t.boundary) c.note = "boundary band";
        }
        out.push_back(c);
    }
    {
        LemmaCheck c;
        c.name = "sign_rule";
        c.applicable = cls.cls != DeterminantClass::ZeroBand;
        c.passed = cls.signs_agree;
        c.slack = -sp.beta * (sp.det > 0 ? 1.0 : -1.0);
        if (!c.applicable) c.note = "beta inside the zero band";
        out.push_back(c);
    }
    return out;
}

// ------------------------------------------------------------ oracle

namespace {

constexpr std::uint64_t kOracleBlock = 1 << 15;
constexpr std::size_t kMaxCounterexamples = 8;

std::mt19937_64 block_rng(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

void check_one(const Mat3& w, std::uint64_t index, double band, OracleReport& rep) {
    const WeylSpectrum sp = weyl_spectrum(w);
    const double norm = std::sqrt(sp.norm2);
    const auto fail = [&](const char* what) {
        if (rep.counterexamples.size() < kMaxCounterexamples)
            rep.counterexamples.push_back({index, what, {sp.alpha, sp.beta, sp.gamma}, sp.det});
    };
    const double tr = std::abs(sp.alpha + sp.beta + sp.gamma);
    rep.max_trace = std::max(rep.max_trace, norm > 0 ? tr / norm : tr);
    if (tr > 1e-10 * std::max(norm, 1e-300)) fail("trace");
    if (norm == 0.0) return;

    // Sign rule with the determinant of the matrix itself, not the product of
    // computed eigenvalues, so the check is not circular.
    const double det = w.determinant();
    if (std::abs(sp.beta) > band * norm) {
        ++rep.sign_rule_checked;
        if ((det > 0.0) != (sp.beta < 0.0) || det == 0.0) fail("sign_rule");
    } else {
        ++rep.zero_band;
    }

    const double a = sp.alpha, b = sp.beta;
    const double mega = std::abs(sp.norm2 - (1.5 * a * a + 2.0 * (b + 0.5 * a) * (b + 0.5 * a)));
    rep.max_norm_identity_defect = std::max(rep.max_norm_identity_defect, mega / sp.norm2);
    if (mega > 1e-12 * sp.norm2 || sp.norm2 < 1.5 * a * a * (1.0 - 1e-15)) fail("norm identity");

    const double frob2 = w.squaredNorm();
    const double thr_lhs = b - a / 4.0;
    if (std::abs(thr_lhs) <= band * norm) {
        ++rep.boundary_excluded;
        return;
    }
    const bool lhs = thr_lhs <= 0.0;
    const bool rhs = det >= det_threshold() * frob2 * std::sqrt(frob2);
    if (lhs != rhs) fail("threshold equivalence");
}

}  // namespace

OracleReport spectrum_checks(const Mat3& w, double band) {
    OracleReport rep;
    rep.samples = 1;
    check_one(w, 0, band, rep);
    return rep;
}

OracleReport random_spectrum_oracle(std::uint64_t seed, std::uint64_t n, int threads, double band) {
    const std::uint64_t blocks = (n + kOracleBlock - 1) / kOracleBlock;
    std::vector<OracleReport> parts(blocks);
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::mt19937_64 rng = block_rng(seed, b);
        std::normal_distribution<double> normal;
        OracleReport& r = parts[b];
        const std::uint64_t lo = b * kOracleBlock, hi = std::min(n, lo + kOracleBlock);
        for (std::uint64_t i = lo; i < hi; ++i) {
            Mat3 w;
            for (int r0 = 0; r0 < 3; ++r0)
                for (int c0 = r0; c0 < 3; ++c0) w(r0, c0) = w(c0, r0) = normal(rng);
            w -= (w.trace() / 3.0) * Mat3::Identity();
            check_one(w, i, band, r);
        }
    });
    OracleReport rep;
    rep.samples = n;
    rep.seed = seed;
    for (const auto& r : parts) {
        rep.sign_rule_checked += r.sign_rule_checked;
        rep.boundary_excluded += r.boundary_excluded;
        rep.zero_band += r.zero_band;
        rep.max_trace = std::max(rep.max_trace, r.max_trace);
        rep.max_norm_identity_defect = std::max(rep.max_norm_identity_defect, r.max_norm_identity_defect);
        for (const auto& c : r.counterexamples)
            if (rep.counterexamples.size() < kMaxCounterexamples) rep.counterexamples.push_back(c);
    }
    constexpr int grid = 10000;
    double prev = ratio_function(-0.5);
    for (int i = 1; i <= grid; ++i) {
        const double x = -0.5 + 1.5 * i / grid;
        const double r = ratio_function(x);
        if (!(r < prev)) rep.monotone = false;
        prev = r;
    }
    return rep;
}

// ------------------------------------------------------------ quadrature

namespace {

constexpr std::uint64_t kQuadBlock = 4096;

double pairwise_sum(const double* x, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += x[i];
        return s;
    }
    const std::size_t h = n / 2;
    return pairwise_sum(x, h) + pairwise_sum(x + h, n - h);
}

struct BlockStats {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;      // sum of squared deviations
    double abs_sum = 0.0;
    double abs_max = 0.0;
};

}  // namespace

QuadratureEstimate integrate(const MetricField& g, const Integrand& phi, const Box& box, std::uint64_t samples,
                             std::uint64_t seed, int threads) {
    std::array<bool, 4> infinite{};
    double box_volume = 1.0;
    for (int a = 0; a < 4; ++a) {
        const auto& b = box.bounds[u(a)];
        const bool lo_inf = std::isinf(b[0]), hi_inf = std::isinf(b[1]);
        if (lo_inf != hi_inf) throw InputError("integrate: half-infinite axes are not supported");
        infinite[u(a)] = lo_inf;
        if (!lo_inf) {
            if (!(b[0] < b[1])) throw InputError("integrate: empty box");
            box_volume *= b[1] - b[0];
        }
    }
    QuadratureEstimate est;
    est.samples = samples;
    est.seed = seed;
    if (samples == 0) return est;

    const std::uint64_t blocks = (samples + kQuadBlock - 1) / kQuadBlock;
    std::vector<BlockStats> stats(blocks);
    parallel_for(blocks, threads, [&](std::size_t blk) {
        std::mt19937_64 rng = block_rng(seed, blk);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const std::uint64_t lo = blk * kQuadBlock, hi = std::min(samples, lo + kQuadBlock);
        std::vector<double> vals;
        vals.reserve(hi - lo);
        for (std::uint64_t i = lo; i < hi; ++i) {
            ChartPoint p;
            double jac = box_volume;
            for (int a = 0; a < 4; ++a) {
                const double t = unif(rng);
                if (infinite[u(a)]) {
                    const double x = std::tan(std::numbers::pi * (t - 0.5));
                    p[u(a)] = x;
                    jac *= std::numbers::pi * (1.0 + x * x);
                } else {
                    const auto& b = box.bounds[u(a)];
                    p[u(a)] = b[0] + (b[1] - b[0]) * t;
                }
            }
            const double density = std::sqrt(values(metric_jets(g, p, 0)).determinant());
            const double v = jac * density * phi(p);
            if (!std::isfinite(v)) throw DomainError("integrand is not finite at a sample point");
            vals.push_back(v);
        }
        BlockStats& s = stats[blk];
        s.n = vals.size();
        s.mean = pairwise_sum(vals.data(), vals.size()) / static_cast<double>(s.n);
        std::vector<double> dev(vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) {
            dev[i] = (vals[i] - s.mean) * (vals[i] - s.mean);
            s.abs_max = std::max(s.abs_max, std::abs(vals[i]));
            vals[i] = std::abs(vals[i]);
        }
        s.m2 = pairwise_sum(dev.data(), dev.size());
        s.abs_sum = pairwise_sum(vals.data(), vals.size());
    });
    // Merge block statistics in block order (Chan et al.), independent of threads.
    BlockStats tot;
    for (const auto& s : stats) {
        if (tot.n == 0) {
            tot = s;
            continue;
        }
        const double n1 = static_cast<double>(tot.n), n2 = static_cast<double>(s.n);
        const double delta = s.mean - tot.mean;
        const double n = n1 + n2;
        tot.mean += delta * n2 / n;
        tot.m2 += s.m2 + delta * delta * n1 * n2 / n;
        tot.n += s.n;
        tot.abs_sum += s.abs_sum;
        tot.abs_max = std::max(tot.abs_max, s.abs_max);
    }
    if (tot.n >= 1000 && tot.abs_max > 0.5 * tot.abs_sum)
        throw DomainError("integrand looks non-integrable: one sample carries most of the total");
    est.value = tot.mean;
    est.stderr_ = tot.n > 1 ? std::sqrt(tot.m2 / static_cast<double>(tot.n - 1) / static_cast<double>(tot.n)) : 0.0;
    return est;
}

Integrand scalar_curvature_integrand(MetricPtr g) {
    auto s = std::make_shared<ScalarCurvatureField>(g);
    return [s](const ChartPoint& p) { return s->jet(p, 0).value(); };
}

Integrand signature_integrand(MetricPtr g, bool tensor_norm) {
    const double factor = tensor_norm ? 4.0 : 1.0;
    return [g, factor](const ChartPoint& p) {
        const CurvatureDecomposition d = decomposition_of(curvature_jets(*g, p, 0));
        return factor * (d.wplus.squaredNorm() - d.wminus.squaredNorm());
    };
}

}  // namespace weylscope
