#pragma once

/**
 * @file weyl.hpp
 * @brief Hodge star, the splitting of 2-forms into self-dual and
 *        anti-self-dual parts, curvature-operator blocks, and the spectral
 *        analysis of W+.
 *
 * Conventions:
 *   <phi, psi> = 1/2 phi_ab psi^ab, so e^0^e^1 + e^2^e^3 has squared norm 2;
 *   (*w)_ab = 1/2 eps_ab^cd w_cd with eps_0123 = sqrt(det g);
 *   the curvature operator is phi_ab -> 1/2 R_ab^cd phi_cd;
 *   |W+|^2 is the Frobenius norm of the 3x3 block, alpha^2 + beta^2 + gamma^2.
 *   The fully covariant contraction W_abcd W^abcd is four times that.
 */

#include <array>
#include <optional>

#include <Eigen/Dense>

#include "weylscope/geometry.hpp"

namespace weylscope {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

/// Antisymmetric 4x4 array of chart components w_ab.
using TwoForm = Mat4;

/// Chart: x0..x3 is positively oriented. Reversed swaps the roles of the
/// self-dual and anti-self-dual bundles.
enum class Orientation { Chart, Reversed };

using RiemannValues = std::array<double, 256>;

struct LambdaBases {
    std::array<TwoForm, 3> plus;
    std::array<TwoForm, 3> minus;
};

LambdaBases lambda_bases(const Mat4& g, Orientation orientation = Orientation::Chart);
TwoForm hodge_star(const TwoForm& w, const Mat4& g);
double form_inner(const TwoForm& a, const TwoForm& b, const Mat4& g_inverse);

struct CurvatureDecomposition {
    Mat3 wplus;    // traceless part of the ++ block
    Mat3 wminus;   // traceless part of the -- block
    Mat3 offdiag;  // the +- block, i.e. trace-free Ricci acting Lambda- -> Lambda+
    Mat4 ricci0;   // trace-free Ricci, chart components
    double s = 0.0;
    LambdaBases bases;
    Mat4 g;
};

/// Pointwise decomposition from metric and R_abcd values. Throws DomainError
/// when R lacks the symmetries of a curvature tensor.
CurvatureDecomposition decompose_curvature(const Mat4& g, const RiemannValues& R,
                                           Orientation orientation = Orientation::Chart);

/// Rebuild R_abcd from the irreducible pieces (used to check the decomposition).
RiemannValues reassemble_curvature(const CurvatureDecomposition& d);

struct WeylSpectrum {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    Mat3 eigenvectors = Mat3::Identity();  // columns for alpha, beta, gamma
    double det = 0.0;
    double norm2 = 0.0;
    double gap = 0.0;
};

/// Closed-form trigonometric eigenvalues, one Newton polish each, and
/// orthonormal eigenvectors.
WeylSpectrum weyl_spectrum(const Mat3& w);

enum class DeterminantClass { Positive, ZeroBand, Negative };

std::string to_string(DeterminantClass c);

struct DeterminantClassification {
    DeterminantClass cls = DeterminantClass::ZeroBand;
    double det = 0.0;
    double beta = 0.0;
    double band = 0.0;
    bool signs_agree = true;  // sign(det) == sign(-beta) outside the band
};

DeterminantClassification classify_determinant(const WeylSpectrum& sp, double tolerance = 1e-9);

/// -(5/21) sqrt(2/21) = ratio_function(1/4).
double det_threshold();

struct ThresholdRecord {
    bool lhs = false;        // beta <= alpha / 4
    bool rhs = false;        // det >= threshold * |W+|^3
    bool agree = false;
    bool boundary = false;   // |beta/alpha - 1/4| inside the band
    double ratio = 0.0;      // beta / alpha
    double normalized_det = 0.0;  // det / |W+|^3
};

ThresholdRecord threshold_check(const WeylSpectrum& sp, double band = 1e-9);

/// det/|W+|^3 as a function of x = beta/alpha on [-1/2, 1].
double ratio_function(double x);

struct SignAnchor {
    /// When set, the eigenform is oriented to have positive inner product with this form.
    std::optional<TwoForm> previous;
};

/// Top eigenform with W+(w) = alpha w and |w|^2 = 2. Throws GapError when the
/// relative gap (alpha - beta)/|W+| is below gap_tol, or when W+ vanishes
/// relative to the curvature scale.
TwoForm top_eigenform(const CurvatureDecomposition& dec, const WeylSpectrum& sp, const SignAnchor& anchor = {},
                      double gap_tol = 1e-7);

/// J_a^b = w_ac g^cb; throws DomainError unless |w|^2 = 2 and w is self-dual.
Mat4 almost_complex(const TwoForm& w, const Mat4& g, double tol = 1e-8);

// ------------------------------------------------------------ jet level

/// Oriented orthonormal coframe e^i = L_ia dx^a (upper-triangular L from
/// Cholesky) and its dual frame E_i = E_ai d_a.
struct FrameJets {
    MatrixJets coframe;  // L[i*4 + a]
    MatrixJets frame;    // E[a*4 + i]
    MatrixJets ginv;
    Jet volume;          // sqrt(det g)
};

FrameJets orthonormal_frame(const MatrixJets& g);

/// Everything curvature-related at one point, as jets of a common order.
struct CurvatureJets {
    ChartPoint point{};
    int order = 0;
    MatrixJets g;       // truncated to `order`
    FrameJets frame;
    TensorJet riemann;
    std::array<TwoFormJets, 3> plus;   // chart components of the Lambda+ basis
    std::array<TwoFormJets, 3> minus;
    std::array<Jet, 9> plus_block;     // W+ + s/12 I
    std::array<Jet, 9> minus_block;
    std::array<Jet, 9> offdiag;
    std::array<Jet, 9> wplus;
    std::array<Jet, 9> wminus;
    Jet s;
};

/// Curvature blocks at order k from metric jets of order >= k + 2.
CurvatureJets curvature_jets(const MatrixJets& g, const ChartPoint& p, int order,
                             Orientation orientation = Orientation::Chart);
CurvatureJets curvature_jets(const MetricField& g, const ChartPoint& p, int order,
                             Orientation orientation = Orientation::Chart);

/// Value-level decomposition extracted from jets.
CurvatureDecomposition decomposition_of(const CurvatureJets& c);

/// Magnitude used to decide whether W+ vanishes: |s|/12 + |W+| + |W-| + |offdiag|.
double curvature_scale(const CurvatureDecomposition& d);

struct TopEigenJets {
    Jet alpha;
    std::array<Jet, 3> vector;  // unit eigenvector in the Lambda+ basis
    WeylSpectrum spectrum;
};

/// Top eigenvalue and unit eigenvector as jets: Newton iteration on the
/// characteristic polynomial in jet arithmetic, and the normalised cross
/// product of two rows of W - alpha I. Sign fixed by the default anchor on
/// the value.
TopEigenJets top_eigen_jets(const std::array<Jet, 9>& w, double scale, double gap_tol = 1e-7);

/// sqrt(2) * sum_A v_A Lambda+_A in chart components.
TwoFormJets eigenform_jets(const CurvatureJets& c, const TopEigenJets& top);

/// Chart components of the symmetric 4-tensor sum_AB W_AB Lambda_A (x) Lambda_B.
TensorJet block_tensor(const std::array<Jet, 9>& w, const std::array<TwoFormJets, 3>& basis, const ChartPoint& p);

Mat3 values(const std::array<Jet, 9>& m);
Mat4 values(const MatrixJets& m);

}  // namespace weylscope
