#include "weylscope/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "weylscope/error.hpp"

namespace weylscope {

namespace {

constexpr int kPairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

// Columns of the orthonormal change of basis from frame pairs to
// (Lambda+ ; Lambda-): entries (pair index, sign) twice per column.
struct Combo {
    int p0, p1;
    double s1;
};
constexpr Combo kPlus[3] = {{0, 5, 1.0}, {1, 4, -1.0}, {2, 3, 1.0}};
constexpr Combo kMinus[3] = {{0, 5, -1.0}, {1, 4, 1.0}, {2, 3, -1.0}};

std::size_t u(int i) { return static_cast<std::size_t>(i); }

void assemble_blocks(CurvatureJets& c, Orientation orientation);

double levi_civita(int a, int b, int c, int d) {
    if (a == b || a == c || a == d || b == c || b == d || c == d) return 0.0;
    int p[4] = {a, b, c, d};
    int sign = 1;
    for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
            if (p[i] > p[j]) sign = -sign;
    return sign;
}

Mat4 inverse_spd(const Mat4& g) {
    Eigen::LLT<Mat4> llt(g);
    if (llt.info() != Eigen::Success) throw DomainError("degenerate metric");
    return llt.solve(Mat4::Identity());
}

MatrixJets constant_jets(const Mat4& m) {
    MatrixJets r;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) r[u(a * 4 + b)] = Jet::constant(m(a, b), 0);
    return r;
}

void anchor_default(Vec3& v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-6) {
            if (v[i] < 0) v = -v;
            return;
        }
    }
}

double cubic_char(const Mat3& w, double l) { return (w - l * Mat3::Identity()).determinant(); }

double cubic_char_derivative(const Mat3& w, double l) {
    const Mat3 m = w - l * Mat3::Identity();
    const double minors = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                          m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return -minors;
}

double polish(const Mat3& w, double l) {
    const double d = cubic_char_derivative(w, l);
    if (d == 0.0) return l;
    const double next = l - cubic_char(w, l) / d;
    if (!std::isfinite(next)) return l;
    return std::abs(cubic_char(w, next)) <= std::abs(cubic_char(w, l)) ? next : l;
}

// Unit vector spanning the kernel of the rank-2 matrix m, from the largest
// cross product of its rows; falls back to the largest-pivot column of the
// adjugate, which is the same set of vectors up to sign.
Vec3 kernel_vector(const Mat3& m) {
    const Vec3 r0 = m.row(0), r1 = m.row(1), r2 = m.row(2);
    Vec3 c[3] = {r0.cross(r1), r0.cross(r2), r1.cross(r2)};
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (c[i].squaredNorm() > c[best].squaredNorm()) best = i;
    const double n = c[best].norm();
    if (n == 0.0) {
        // Rank below two: any vector orthogonal to the largest row.
        Vec3 r = r0;
        if (r1.squaredNorm() > r.squaredNorm()) r = r1;
        if (r2.squaredNorm() > r.squaredNorm()) r = r2;
        if (r.squaredNorm() == 0.0) return Vec3::UnitX();
        Vec3 t = std::abs(r[0]) < 0.9 * r.norm() ? Vec3::UnitX() : Vec3::UnitY();
        return r.cross(t).normalized();
    }
    return c[best] / n;
}

}  // namespace

// ------------------------------------------------------------ pointwise

LambdaBases lambda_bases(const Mat4& g, Orientation orientation) {
    Eigen::LLT<Mat4> llt(g);
    if (llt.info() != Eigen::Success) throw DomainError("degenerate metric");
    const Mat4 L = llt.matrixL().transpose();  // e^i = L_ia dx^a
    std::array<TwoForm, 6> e;
    for (int P = 0; P < 6; ++P) {
        const int i = kPairs[P][0], j = kPairs[P][1];
        e[u(P)] = L.row(i).transpose() * L.row(j) - L.row(j).transpose() * L.row(i);
    }
    LambdaBases b;
    const double r = 1.0 / std::numbers::sqrt2;
    for (int A = 0; A < 3; ++A) {
        b.plus[u(A)] = r * (e[u(kPlus[A].p0)] + kPlus[A].s1 * e[u(kPlus[A].p1)]);
        b.minus[u(A)] = r * (e[u(kMinus[A].p0)] + kMinus[A].s1 * e[u(kMinus[A].p1)]);
    }
    if (orientation == Orientation::Reversed) std::swap(b.plus, b.minus);
    return b;
}

TwoForm hodge_star(const TwoForm& w, const Mat4& g) {
    const Mat4 gi = inverse_spd(g);
    const Mat4 up = gi * w * gi;  // w^ef
    const double vol = std::sqrt(g.determinant());
    TwoForm out = TwoForm::Zero();
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double s = 0.0;
            for (int e = 0; e < 4; ++e)
                for (int f = 0; f < 4; ++f) s += levi_civita(a, b, e, f) * up(e, f);
            out(a, b) = 0.5 * vol * s;
        }
    return out;
}

double form_inner(const TwoForm& a, const TwoForm& b, const Mat4& g_inverse) {
    return 0.5 * (a.cwiseProduct(g_inverse * b * g_inverse)).sum();
}

namespace {

double riemann_symmetry_defect(const RiemannValues& R) {
    const auto at = [&](int a, int b, int c, int d) { return R[u(((a * 4 + b) * 4 + c) * 4 + d)]; };
    double defect = 0.0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                for (int d = 0; d < 4; ++d) {
                    defect = std::max(defect, std::abs(at(a, b, c, d) + at(b, a, c, d)));
                    defect = std::max(defect, std::abs(at(a, b, c, d) + at(a, b, d, c)));
                    defect = std::max(defect, std::abs(at(a, b, c, d) - at(c, d, a, b)));
                    defect = std::max(defect, std::abs(at(a, b, c, d) + at(a, c, d, b) + at(a, d, b, c)));
                }
    return defect;
}

}  // namespace

CurvatureDecomposition decompose_curvature(const Mat4& g, const RiemannValues& R, Orientation orientation) {
    double scale = 0.0;
    for (double v : R) scale = std::max(scale, std::abs(v));
    if (riemann_symmetry_defect(R) > 1e-10 * std::max(scale, 1.0))
        throw DomainError("curvature tensor violates the Riemann symmetries");
    const MatrixJets gj = constant_jets(g);
    TensorJet Rj({TensorJet::Slot::Down, TensorJet::Slot::Down, TensorJet::Slot::Down, TensorJet::Slot::Down},
                 ChartPoint{}, 0);
    for (std::size_t i = 0; i < 256; ++i) Rj[i] = Jet::constant(R[i], 0);

    // Reuse the jet path at order zero.
    CurvatureJets c;
    c.order = 0;
    c.g = gj;
    c.frame = orthonormal_frame(gj);
    c.riemann = Rj;
    assemble_blocks(c, orientation);
    return decomposition_of(c);
}

RiemannValues reassemble_curvature(const CurvatureDecomposition& d) {
    Eigen::Matrix<double, 6, 6> M;
    const Mat3 I = Mat3::Identity() * (d.s / 12.0);
    M.block<3, 3>(0, 0) = d.wplus + I;
    M.block<3, 3>(3, 3) = d.wminus + I;
    M.block<3, 3>(0, 3) = d.offdiag;
    M.block<3, 3>(3, 0) = d.offdiag.transpose();
    std::array<const TwoForm*, 6> basis{&d.bases.plus[0], &d.bases.plus[1], &d.bases.plus[2],
                                        &d.bases.minus[0], &d.bases.minus[1], &d.bases.minus[2]};
    RiemannValues R{};
    for (int X = 0; X < 6; ++X)
        for (int Y = 0; Y < 6; ++Y) {
            const double m = M(X, Y);
            if (m == 0.0) continue;
            const TwoForm& bx = *basis[u(X)];
            const TwoForm& by = *basis[u(Y)];
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b)
                    for (int c = 0; c < 4; ++c)
                        for (int e = 0; e < 4; ++e) R[u(((a * 4 + b) * 4 + c) * 4 + e)] += m * bx(a, b) * by(c, e);
        }
    return R;
}

// ------------------------------------------------------------ spectrum

WeylSpectrum weyl_spectrum(const Mat3& w_in) {
    if ((w_in - w_in.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, w_in.cwiseAbs().maxCoeff()))
        throw InputError("W+ block is not symmetric");
    const Mat3 w = 0.5 * (w_in + w_in.transpose());
    WeylSpectrum sp;
    const double q = w.trace() / 3.0;
    const double p1 = w(0, 1) * w(0, 1) + w(0, 2) * w(0, 2) + w(1, 2) * w(1, 2);
    const double p2 = (w(0, 0) - q) * (w(0, 0) - q) + (w(1, 1) - q) * (w(1, 1) - q) + (w(2, 2) - q) * (w(2, 2) - q) +
                      2.0 * p1;
    if (p2 == 0.0) {
        sp.alpha = sp.beta = sp.gamma = q;
        sp.eigenvectors = Mat3::Identity();
    } else {
        const double p = std::sqrt(p2 / 6.0);
        const Mat3 B = (w - q * Mat3::Identity()) / p;
        const double r = std::clamp(B.determinant() / 2.0, -1.0, 1.0);
        const double phi = std::acos(r) / 3.0;
        double e1 = q + 2.0 * p * std::cos(phi);
        double e3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
        double e2 = 3.0 * q - e1 - e3;
        e1 = polish(w, e1);
        e2 = polish(w, e2);
        e3 = polish(w, e3);
        double ev[3] = {e1, e2, e3};
        std::sort(ev, ev + 3, std::greater<>());

        // The eigenvalue farthest from the others has a well-conditioned
        // kernel. The remaining pair is resolved by a rotation in its
        // complement, and all three values are then re-read as Rayleigh
        // quotients: near a double root the polished cubic roots are only
        // good to about sqrt(eps), the deflated 2x2 problem is not.
        const bool top_isolated = (ev[0] - ev[1]) >= (ev[1] - ev[2]);
        const double iso = top_isolated ? ev[0] : ev[2];
        const Vec3 v = kernel_vector(w - iso * Mat3::Identity());
        Vec3 t = std::abs(v[0]) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
        const Vec3 u1 = (t - v.dot(t) * v).normalized();
        const Vec3 u2 = v.cross(u1);
        const double a11 = u1.dot(w * u1), a22 = u2.dot(w * u2), a12 = u1.dot(w * u2);
        const double theta = 0.5 * std::atan2(2.0 * a12, a11 - a22);
        const double c = std::cos(theta), sn = std::sin(theta);
        const Vec3 f1 = c * u1 + sn * u2;  // larger of the pair
        const Vec3 f2 = -sn * u1 + c * u2;
        const double mean = 0.5 * (a11 + a22);
        const double rad = std::hypot(0.5 * (a11 - a22), a12);
        const double viso = v.dot(w * v);
        if (top_isolated) {
            sp.alpha = viso;
            sp.beta = mean + rad;
            sp.gamma = mean - rad;
            sp.eigenvectors.col(0) = v;
            sp.eigenvectors.col(1) = f1;
            sp.eigenvectors.col(2) = f2;
        } else {
            sp.alpha = mean + rad;
            sp.beta = mean - rad;
            sp.gamma = viso;
            sp.eigenvectors.col(0) = f1;
            sp.eigenvectors.col(1) = f2;
            sp.eigenvectors.col(2) = v;
        }
        // Rounding can only reorder values closer than a few ulps.
        if (sp.beta > sp.alpha) std::swap(sp.alpha, sp.beta);
        if (sp.gamma > sp.beta) std::swap(sp.beta, sp.gamma);
    }
    sp.det = sp.alpha * sp.beta * sp.gamma;
    sp.norm2 = sp.alpha * sp.alpha + sp.beta * sp.beta + sp.gamma * sp.gamma;
    sp.gap = sp.alpha - sp.beta;
    return sp;
}

std::string to_string(DeterminantClass c) {
    switch (c) {
        case DeterminantClass::Positive: return "positive";
        case DeterminantClass::ZeroBand: return "zero-band";
        case DeterminantClass::Negative: return "negative";
    }
    return "?";
}

DeterminantClassification classify_determinant(const WeylSpectrum& sp, double tolerance) {
    DeterminantClassification c;
    c.det = sp.det;
    c.beta = sp.beta;
    c.band = tolerance * std::sqrt(sp.norm2);
    if (sp.beta < -c.band)
        c.cls = DeterminantClass::Positive;
    else if (sp.beta > c.band)
        c.cls = DeterminantClass::Negative;
    else
        c.cls = DeterminantClass::ZeroBand;
    if (c.cls != DeterminantClass::ZeroBand) {
        const bool det_positive = sp.det > 0.0;
        c.signs_agree = det_positive == (c.cls == DeterminantClass::Positive) && sp.det != 0.0;
    }
    return c;
}

double det_threshold() { return -(5.0 / 21.0) * std::sqrt(2.0 / 21.0); }

double ratio_function(double x) {
    if (!(x >= -0.5 - 1e-12 && x <= 1.0 + 1e-12)) throw DomainError("ratio function needs x in [-1/2, 1]");
    const double q = 1.0 + x + x * x;
    return -(x + x * x) / (2.0 * std::numbers::sqrt2 * q * std::sqrt(q));
}

ThresholdRecord threshold_check(const WeylSpectrum& sp, double band) {
    if (!(sp.norm2 > 0.0)) throw DomainError("threshold check needs W+ != 0");
    const double norm = std::sqrt(sp.norm2);
    ThresholdRecord t;
    t.lhs = sp.beta <= sp.alpha / 4.0;
    t.normalized_det = sp.det / (sp.norm2 * norm);
    t.rhs = t.normalized_det >= det_threshold();
    t.agree = t.lhs == t.rhs;
    t.ratio = sp.beta / sp.alpha;
    t.boundary = std::abs(sp.beta - sp.alpha / 4.0) <= band * norm;
    return t;
}

double curvature_scale(const CurvatureDecomposition& d) {
    return std::abs(d.s) / 12.0 + d.wplus.norm() + d.wminus.norm() + d.offdiag.norm();
}

namespace {

void check_gap(const WeylSpectrum& sp, double scale, double gap_tol) {
    const double norm = std::sqrt(sp.norm2);
    if (norm == 0.0 || norm <= 1e-10 * scale) throw GapError("top eigenvalue not simple: W+ = 0", 0.0, gap_tol);
    if (sp.gap < gap_tol * norm)
        throw GapError("top eigenvalue not simple: relative gap " + std::to_string(sp.gap / norm) +
                           " below tolerance " + std::to_string(gap_tol),
                       sp.gap / norm, gap_tol);
}

}  // namespace

TwoForm top_eigenform(const CurvatureDecomposition& dec, const WeylSpectrum& sp, const SignAnchor& anchor,
                      double gap_tol) {
    check_gap(sp, curvature_scale(dec), gap_tol);
    Vec3 v = sp.eigenvectors.col(0);
    anchor_default(v);
    TwoForm w = TwoForm::Zero();
    for (int A = 0; A < 3; ++A) w += std::numbers::sqrt2 * v[A] * dec.bases.plus[u(A)];
    if (anchor.previous) {
        const Mat4 gi = inverse_spd(dec.g);
        if (form_inner(w, *anchor.previous, gi) < 0.0) w = -w;
    }
    return w;
}

Mat4 almost_complex(const TwoForm& w, const Mat4& g, double tol) {
    const Mat4 gi = inverse_spd(g);
    if ((w + w.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw DomainError("almost_complex: form is not antisymmetric");
    const double n2 = form_inner(w, w, gi);
    if (std::abs(n2 - 2.0) > tol) throw DomainError("almost_complex: |w|^2 = " + std::to_string(n2) + ", expected 2");
    const TwoForm sw = hodge_star(w, g);
    if ((sw - w).cwiseAbs().maxCoeff() > tol * std::max(1.0, w.cwiseAbs().maxCoeff()))
        throw DomainError("almost_complex: form is not self-dual");
    return w * gi;  // J_a^b = w_ac g^cb
}

// ------------------------------------------------------------ jet level

Mat3 values(const std::array<Jet, 9>& m) {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = m[u(i * 3 + j)].value();
    return r;
}

Mat4 values(const MatrixJets& m) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r(i, j) = m[u(i * 4 + j)].value();
    return r;
}

FrameJets orthonormal_frame(const MatrixJets& g) {
    const MatrixJets C = cholesky_lower(g);
    const MatrixJets X = lower_inverse(C);
    FrameJets f;
    for (int i = 0; i < 4; ++i)
        for (int a = 0; a < 4; ++a) {
            f.coframe[u(i * 4 + a)] = C[u(a * 4 + i)];
            f.frame[u(a * 4 + i)] = X[u(i * 4 + a)];
        }
    const int k = g[0].order();
    for (int a = 0; a < 4; ++a)
        for (int b = a; b < 4; ++b) {
            Jet s(k);
            for (int m = b; m < 4; ++m) fma_into(s, X[u(m * 4 + a)], X[u(m * 4 + b)]);
            f.ginv[u(a * 4 + b)] = s;
            f.ginv[u(b * 4 + a)] = s;
        }
    f.volume = C[0] * C[5] * C[10] * C[15];
    return f;
}

namespace {

// Fills the Lambda bases and the curvature blocks from g, frame and riemann.
void assemble_blocks(CurvatureJets& c, Orientation orientation) {
    const int k = c.order;
    const MatrixJets& L = c.frame.coframe;
    const MatrixJets& E = c.frame.frame;

    // Coordinate components of the frame 2-forms e^i ^ e^j.
    std::array<TwoFormJets, 6> e;
    for (int P = 0; P < 6; ++P) {
        const int i = kPairs[P][0], j = kPairs[P][1];
        for (int a = 0; a < 4; ++a) {
            e[u(P)][u(a * 4 + a)] = Jet(k);
            for (int b = a + 1; b < 4; ++b) {
                Jet v = L[u(i * 4 + a)] * L[u(j * 4 + b)];
                fma_into(v, -L[u(j * 4 + a)], L[u(i * 4 + b)]);
                e[u(P)][u(a * 4 + b)] = v;
                e[u(P)][u(b * 4 + a)] = -v;
            }
        }
    }
    const double r = 1.0 / std::numbers::sqrt2;
    for (int A = 0; A < 3; ++A)
        for (std::size_t x = 0; x < 16; ++x) {
            c.plus[u(A)][x] = (e[u(kPlus[A].p0)][x] + kPlus[A].s1 * e[u(kPlus[A].p1)][x]) * r;
            c.minus[u(A)][x] = (e[u(kMinus[A].p0)][x] + kMinus[A].s1 * e[u(kMinus[A].p1)][x]) * r;
        }

    // Bivector transform T[P][I] = E_a i E_b j - E_a j E_b i for coordinate pair P = (a b).
    std::array<std::array<Jet, 6>, 6> T;
    for (int P = 0; P < 6; ++P) {
        const int a = kPairs[P][0], b = kPairs[P][1];
        for (int I = 0; I < 6; ++I) {
            const int i = kPairs[I][0], j = kPairs[I][1];
            Jet v = E[u(a * 4 + i)] * E[u(b * 4 + j)];
            fma_into(v, -E[u(a * 4 + j)], E[u(b * 4 + i)]);
            T[u(P)][u(I)] = v;
        }
    }
    // Frame curvature R_ijkl over pairs: T^T Rc T.
    std::array<std::array<Jet, 6>, 6> RT;  // Rc T
    for (int P = 0; P < 6; ++P)
        for (int J = 0; J < 6; ++J) {
            Jet s(k);
            for (int Q = 0; Q < 6; ++Q)
                fma_into(s, c.riemann.at(kPairs[P][0], kPairs[P][1], kPairs[Q][0], kPairs[Q][1]), T[u(Q)][u(J)]);
            RT[u(P)][u(J)] = s;
        }
    std::array<std::array<Jet, 6>, 6> Rf;
    for (int I = 0; I < 6; ++I)
        for (int J = I; J < 6; ++J) {
            Jet s(k);
            for (int P = 0; P < 6; ++P) fma_into(s, T[u(P)][u(I)], RT[u(P)][u(J)]);
            Rf[u(I)][u(J)] = s;
            Rf[u(J)][u(I)] = s;
        }
    // Change of basis to (Lambda+, Lambda-).
    const auto combo = [&](const Combo& x, const Combo& y) {
        Jet v = Rf[u(x.p0)][u(y.p0)];
        v += y.s1 * Rf[u(x.p0)][u(y.p1)];
        v += x.s1 * Rf[u(x.p1)][u(y.p0)];
        v += (x.s1 * y.s1) * Rf[u(x.p1)][u(y.p1)];
        return v * 0.5;
    };
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) {
            c.plus_block[u(A * 3 + B)] = combo(kPlus[A], kPlus[B]);
            c.minus_block[u(A * 3 + B)] = combo(kMinus[A], kMinus[B]);
            c.offdiag[u(A * 3 + B)] = combo(kPlus[A], kMinus[B]);
        }
    if (orientation == Orientation::Reversed) {
        std::swap(c.plus, c.minus);
        std::swap(c.plus_block, c.minus_block);
        std::array<Jet, 9> t;
        for (int A = 0; A < 3; ++A)
            for (int B = 0; B < 3; ++B) t[u(A * 3 + B)] = c.offdiag[u(B * 3 + A)];
        c.offdiag = t;
    }

    c.s = scalar_curvature(c.riemann, c.frame.ginv);
    const Jet tp = (c.plus_block[0] + c.plus_block[4] + c.plus_block[8]) * (1.0 / 3.0);
    const Jet tm = (c.minus_block[0] + c.minus_block[4] + c.minus_block[8]) * (1.0 / 3.0);
    const double scale = std::max({std::abs(c.s.value()), 1e-300});
    const double mismatch = std::max(std::abs(12.0 * tp.value() - c.s.value()), std::abs(12.0 * tm.value() - c.s.value()));
    // Chart conditioning: far out on a whole-space chart the coordinate
    // derivatives lose roughly cond(g)^2 digits.
    const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Mat4>(values(c.g), Eigen::EigenvaluesOnly).eigenvalues();
    const double cond = ev[3] / ev[0];
    double wscale = 0.0;
    for (int i = 0; i < 9; ++i)
        wscale = std::max({wscale, std::abs(c.plus_block[u(i)].value()), std::abs(c.minus_block[u(i)].value())});
    if (mismatch > 1e-9 * std::max(scale, wscale) * std::max(1.0, cond * cond))
        throw DomainError("scalar curvature from the Lambda+ block disagrees with the contraction (" +
                          std::to_string(mismatch) + ")");
    c.wplus = c.plus_block;
    c.wminus = c.minus_block;
    for (int A = 0; A < 3; ++A) {
        c.wplus[u(A * 4)] -= tp;
        c.wminus[u(A * 4)] -= tm;
    }
}

}  // namespace

CurvatureJets curvature_jets(const MatrixJets& g, const ChartPoint& p, int order, Orientation orientation) {
    CurvatureJets c;
    c.point = p;
    c.order = order;
    c.riemann = riemann(g, p, order);
    c.g = truncate(g, order);
    c.frame = orthonormal_frame(c.g);
    assemble_blocks(c, orientation);
    return c;
}

CurvatureJets curvature_jets(const MetricField& g, const ChartPoint& p, int order, Orientation orientation) {
    return curvature_jets(metric_jets(g, p, order + 2), p, order, orientation);
}

CurvatureDecomposition decomposition_of(const CurvatureJets& c) {
    CurvatureDecomposition d;
    d.g = values(c.g);
    d.s = c.s.value();
    d.wplus = values(c.wplus);
    d.wminus = values(c.wminus);
    d.offdiag = values(c.offdiag);
    for (int A = 0; A < 3; ++A) {
        d.bases.plus[u(A)] = values(c.plus[u(A)]);
        d.bases.minus[u(A)] = values(c.minus[u(A)]);
    }
    // Trace-free Ricci from the off-diagonal block alone: its 4-tensor is
    // half the Kulkarni-Nomizu product of ricci0 with g, whose contraction
    // returns ricci0.
    const Mat4 gi = values(c.frame.ginv);
    Mat4 ric0 = Mat4::Zero();
    for (int A = 0; A < 3; ++A)
        for (int B = 0; B < 3; ++B) {
            const double m = d.offdiag(A, B);
            if (m == 0.0) continue;
            const TwoForm& P = d.bases.plus[u(A)];
            const TwoForm& Q = d.bases.minus[u(B)];
            // X_abcd = m (P_ab Q_cd + Q_ab P_cd); ric0_bd = g^ac X_abcd.
            ric0 += m * (P.transpose() * gi * Q + Q.transpose() * gi * P);
        }
    d.ricci0 = 0.5 * (ric0 + ric0.transpose());
    return d;
}

TopEigenJets top_eigen_jets(const std::array<Jet, 9>& w, double scale, double gap_tol) {
    TopEigenJets out;
    out.spectrum = weyl_spectrum(values(w));
    check_gap(out.spectrum, scale, gap_tol);
    int k = w[0].order();
    for (const Jet& x : w) k = std::min(k, x.order());

    // Newton on det(W - l I) = 0; each step doubles the number of correct orders.
    Jet l = Jet::constant(out.spectrum.alpha, k);
    int steps = 1;
    while ((1 << (steps - 1)) <= k) ++steps;
    for (int it = 0; it < steps + 1 && k > 0; ++it) {
        std::array<Jet, 9> m = w;
        for (int A = 0; A < 3; ++A) m[u(A * 4)] -= l;
        const auto M = [&](int i, int j) -> const Jet& { return m[u(i * 3 + j)]; };
        const Jet c00 = M(1, 1) * M(2, 2) - M(1, 2) * M(2, 1);
        const Jet c11 = M(0, 0) * M(2, 2) - M(0, 2) * M(2, 0);
        const Jet c22 = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
        Jet det = M(0, 0) * c00;
        fma_into(det, -M(0, 1), M(1, 0) * M(2, 2) - M(1, 2) * M(2, 0));
        fma_into(det, M(0, 2), M(1, 0) * M(2, 1) - M(1, 1) * M(2, 0));
        const Jet dp = -(c00 + c11 + c22);
        l -= det / dp;
    }
    l.taylor(0) = out.spectrum.alpha;
    out.alpha = l;

    std::array<Jet, 9> m = w;
    for (int A = 0; A < 3; ++A) {
        m[u(A * 4)] -= l;
        for (int B = 0; B < 3; ++B)
            if (m[u(A * 3 + B)].order() > k) m[u(A * 3 + B)] = m[u(A * 3 + B)].truncate(k);
    }
    const auto row = [&](int i) { return std::array<const Jet*, 3>{&m[u(i * 3)], &m[u(i * 3 + 1)], &m[u(i * 3 + 2)]}; };
    const auto cross = [](const std::array<const Jet*, 3>& a, const std::array<const Jet*, 3>& b) {
        return std::array<Jet, 3>{*a[1] * *b[2] - *a[2] * *b[1], *a[2] * *b[0] - *a[0] * *b[2],
                                  *a[0] * *b[1] - *a[1] * *b[0]};
    };
    std::array<std::array<Jet, 3>, 3> cands = {cross(row(0), row(1)), cross(row(0), row(2)), cross(row(1), row(2))};
    const auto n2 = [](const std::array<Jet, 3>& x) {
        return x[0].value() * x[0].value() + x[1].value() * x[1].value() + x[2].value() * x[2].value();
    };
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (n2(cands[u(i)]) > n2(cands[u(best)])) best = i;
    std::array<Jet, 3> v = cands[u(best)];
    if (n2(v) == 0.0) {
        // Only possible when W - alpha I has rank < 2, excluded by the gap check.
        throw GapError("top eigenvalue not simple: eigenvector undetermined", 0.0, gap_tol);
    }
    Jet nn = v[0] * v[0];
    fma_into(nn, v[1], v[1]);
    fma_into(nn, v[2], v[2]);
    const Jet inv = reciprocal(sqrt(nn));
    Vec3 val;
    for (int A = 0; A < 3; ++A) {
        v[u(A)] *= inv;
        val[A] = v[u(A)].value();
    }
    Vec3 anchored = val;
    anchor_default(anchored);
    if (anchored.dot(val) < 0.0)
        for (auto& x : v) x = -x;
    out.vector = v;
    return out;
}

TwoFormJets eigenform_jets(const CurvatureJets& c, const TopEigenJets& top) {
    const int k = std::min(c.order, top.vector[0].order());
    TwoFormJets w;
    for (std::size_t x = 0; x < 16; ++x) {
        Jet s(k);
        for (int A = 0; A < 3; ++A) fma_into(s, top.vector[u(A)], c.plus[u(A)][x]);
        w[x] = s * std::numbers::sqrt2;
    }
    return w;
}

TensorJet block_tensor(const std::array<Jet, 9>& w, const std::array<TwoFormJets, 3>& basis, const ChartPoint& p) {
    int k = basis[0][1].order();
    for (const Jet& x : w) k = std::min(k, x.order());
    using S = TensorJet::Slot;
    TensorJet T({S::Down, S::Down, S::Down, S::Down}, p, k);
    // Z_A = sum_B W_AB Lambda_B
    std::array<TwoFormJets, 3> Z;
    for (int A = 0; A < 3; ++A)
        for (std::size_t x = 0; x < 16; ++x) {
            Jet s(k);
            for (int B = 0; B < 3; ++B) fma_into(s, w[u(A * 3 + B)], basis[u(B)][x]);
            Z[u(A)][x] = s;
        }
    for (int P = 0; P < 6; ++P) {
        const int a = kPairs[P][0], b = kPairs[P][1];
        for (int Q = 0; Q < 6; ++Q) {
            const int cc = kPairs[Q][0], d = kPairs[Q][1];
            Jet s(k);
            for (int A = 0; A < 3; ++A) fma_into(s, basis[u(A)][u(a * 4 + b)], Z[u(A)][u(cc * 4 + d)]);
            const Jet ns = -s;
            T.at(a, b, cc, d) = s;
            T.at(b, a, cc, d) = ns;
            T.at(a, b, d, cc) = ns;
            T.at(b, a, d, cc) = s;
        }
    }
    return T;
}

}  // namespace weylscope
