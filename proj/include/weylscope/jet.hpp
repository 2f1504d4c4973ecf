#pragma once

/**
 * @file jet.hpp
 * @brief Truncated Taylor jets in the four chart variables x0..x3.
 *
 * A Jet of order k stores every Taylor coefficient c_m = (d^m f)(p) / m! for
 * multi-indices |m| <= k, in graded lexicographic order. The graded layout
 * makes truncation a prefix operation, so jets of different order combine by
 * working at the smaller order.
 *
 * Arithmetic is exact truncated power-series algebra: products follow the
 * Cauchy rule and elementary functions are applied by composing their
 * univariate Taylor series with the jet's non-constant part.
 */

#include <array>
#include <cstddef>
#include <span>

#include <boost/container/small_vector.hpp>

namespace weylscope {

inline constexpr int kDim = 4;

// Metric fields built from Kahler potentials consume two orders, and the
// Derdzinski round trip stacks two curvature computations on top of that.
inline constexpr int kMaxJetOrder = 10;

using MultiIndex = std::array<int, kDim>;

/// Number of coefficients of an order-k jet, binomial(4 + k, 4).
std::size_t jet_size(int order);

/// Graded-lex position of a multi-index; throws OrderError past kMaxJetOrder.
int index_of(const MultiIndex& m);
const MultiIndex& multi_index(int index);
int degree_of(int index);

class Jet {
public:
    Jet() : order_(0), c_(1, 0.0) {}
    explicit Jet(int order, double value = 0.0);

    static Jet constant(double value, int order) { return Jet(order, value); }
    /// The coordinate function x_axis expanded at a point whose axis-th coordinate is x.
    static Jet variable(int axis, double x, int order);

    int order() const noexcept { return order_; }
    std::size_t size() const noexcept { return c_.size(); }
    double value() const noexcept { return c_[0]; }

    std::span<const double> coefficients() const noexcept { return {c_.data(), c_.size()}; }
    double taylor(std::size_t index) const { return c_[index]; }
    double& taylor(std::size_t index) { return c_[index]; }

    /// Partial derivative d^m f at the base point (zero beyond the jet order).
    double derivative(const MultiIndex& m) const;
    void set_derivative(const MultiIndex& m, double value);

    /// d/dx_axis as a jet of one order less.
    Jet partial(int axis) const;
    Jet truncate(int order) const;

    Jet& operator+=(const Jet& other);
    Jet& operator-=(const Jet& other);
    Jet& operator*=(const Jet& other);
    Jet& operator/=(const Jet& other);
    Jet& operator+=(double s) { c_[0] += s; return *this; }
    Jet& operator-=(double s) { c_[0] -= s; return *this; }
    Jet& operator*=(double s);
    Jet& operator/=(double s) { return *this *= (1.0 / s); }

    Jet operator-() const;

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator*(const Jet& a, const Jet& b);
    friend Jet operator/(const Jet& a, const Jet& b);
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (-a) += s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator/(Jet a, double s) { return a /= s; }
    friend Jet operator/(double s, const Jet& a);

private:
    int order_;
    boost::container::small_vector<double, 15> c_;
};

/// a*b + c*d style accumulation without temporaries: acc += a*b.
void fma_into(Jet& acc, const Jet& a, const Jet& b);

/// sum_n series[n] * (x - x(p))^n, truncated at x's order.
Jet compose(const Jet& x, std::span<const double> series);

Jet reciprocal(const Jet& x);
Jet exp(const Jet& x);
Jet log(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);
Jet sqrt(const Jet& x);
Jet atan(const Jet& x);
Jet pow(const Jet& x, double exponent);
Jet pow(const Jet& x, int exponent);

}  // namespace weylscope
