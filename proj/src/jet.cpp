#include "weylscope/jet.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "weylscope/error.hpp"

namespace weylscope {

namespace {

constexpr int kRadix = kMaxJetOrder + 1;

int encode(const MultiIndex& m) {
    return ((m[0] * kRadix + m[1]) * kRadix + m[2]) * kRadix + m[3];
}

std::size_t binomial(int n, int k) {
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    return r;
}

struct Tables {
    std::array<std::size_t, kMaxJetOrder + 1> sizes{};
    std::vector<MultiIndex> indices;
    std::vector<int> degree;
    std::vector<int> lookup;       // encode(m) -> index
    std::vector<double> factorial; // m! per index
    std::vector<int> add_offset;   // row start in add_table per index i
    std::vector<int> add_table;    // index of m_i + m_j, for j < size(kMax - |m_i|)
    std::array<std::vector<int>, kDim> shift;  // index of m + e_axis, or -1

    Tables() {
        for (int k = 0; k <= kMaxJetOrder; ++k) sizes[k] = binomial(k + kDim, kDim);
        lookup.assign(static_cast<std::size_t>(kRadix * kRadix * kRadix * kRadix), -1);
        for (int d = 0; d <= kMaxJetOrder; ++d) {
            for (int a = d; a >= 0; --a)
                for (int b = d - a; b >= 0; --b)
                    for (int c = d - a - b; c >= 0; --c) {
                        MultiIndex m{a, b, c, d - a - b - c};
                        lookup[encode(m)] = static_cast<int>(indices.size());
                        indices.push_back(m);
                        degree.push_back(d);
                    }
        }
        const auto fact = [](int n) {
            double f = 1.0;
            for (int i = 2; i <= n; ++i) f *= i;
            return f;
        };
        for (const auto& m : indices) factorial.push_back(fact(m[0]) * fact(m[1]) * fact(m[2]) * fact(m[3]));

        for (std::size_t i = 0; i < indices.size(); ++i) {
            add_offset.push_back(static_cast<int>(add_table.size()));
            const std::size_t nj = sizes[kMaxJetOrder - degree[i]];
            for (std::size_t j = 0; j < nj; ++j) {
                MultiIndex s;
                for (int a = 0; a < kDim; ++a) s[a] = indices[i][a] + indices[j][a];
                add_table.push_back(lookup[encode(s)]);
            }
        }
        for (int axis = 0; axis < kDim; ++axis) {
            shift[axis].assign(indices.size(), -1);
            for (std::size_t i = 0; i < indices.size(); ++i) {
                if (degree[i] == kMaxJetOrder) continue;
                MultiIndex s = indices[i];
                ++s[axis];
                shift[axis][i] = lookup[encode(s)];
            }
        }
    }
};

const Tables& tables() {
    static const Tables t;
    return t;
}

void check_order(int order) {
    if (order < 0 || order > kMaxJetOrder)
        throw OrderError("jet order " + std::to_string(order) + " outside [0, " +
                         std::to_string(kMaxJetOrder) + "]");
}

// Accumulate the truncated product a*b into out (all at order k).
void multiply_into(double* out, const double* a, const double* b, int k) {
    const Tables& t = tables();
    const std::size_t n = t.sizes[k];
    for (std::size_t i = 0; i < n; ++i) {
        const double ai = a[i];
        if (ai == 0.0) continue;
        const std::size_t nj = t.sizes[k - t.degree[i]];
        const int* row = t.add_table.data() + t.add_offset[i];
        for (std::size_t j = 0; j < nj; ++j) out[row[j]] += ai * b[j];
    }
}

}  // namespace

std::size_t jet_size(int order) {
    check_order(order);
    return tables().sizes[order];
}

int index_of(const MultiIndex& m) {
    int total = 0;
    for (int v : m) {
        if (v < 0) throw OrderError("negative multi-index entry");
        total += v;
    }
    if (total > kMaxJetOrder) throw OrderError("multi-index exceeds maximum jet order");
    return tables().lookup[encode(m)];
}

const MultiIndex& multi_index(int index) { return tables().indices.at(static_cast<std::size_t>(index)); }

int degree_of(int index) { return tables().degree.at(static_cast<std::size_t>(index)); }

Jet::Jet(int order, double value) : order_(order) {
    check_order(order);
    c_.assign(tables().sizes[order], 0.0);
    c_[0] = value;
}

Jet Jet::variable(int axis, double x, int order) {
    Jet j(order, x);
    if (order >= 1) j.c_[static_cast<std::size_t>(tables().shift[axis][0])] = 1.0;
    return j;
}

double Jet::derivative(const MultiIndex& m) const {
    const int idx = index_of(m);
    if (static_cast<std::size_t>(idx) >= c_.size()) return 0.0;
    return c_[static_cast<std::size_t>(idx)] * tables().factorial[static_cast<std::size_t>(idx)];
}

void Jet::set_derivative(const MultiIndex& m, double value) {
    const int idx = index_of(m);
    if (static_cast<std::size_t>(idx) >= c_.size()) throw OrderError("derivative beyond jet order");
    c_[static_cast<std::size_t>(idx)] = value / tables().factorial[static_cast<std::size_t>(idx)];
}

Jet Jet::partial(int axis) const {
    if (order_ == 0) throw OrderError("cannot differentiate an order-0 jet");
    const Tables& t = tables();
    Jet r(order_ - 1);
    const auto& sh = t.shift[axis];
    for (std::size_t i = 0; i < r.c_.size(); ++i) {
        const auto src = static_cast<std::size_t>(sh[i]);
        r.c_[i] = c_[src] * (t.indices[i][axis] + 1);
    }
    return r;
}

Jet Jet::truncate(int order) const {
    if (order > order_) throw OrderError("cannot extend a jet beyond its order");
    if (order == order_) return *this;
    Jet r(order);
    std::copy_n(c_.begin(), r.c_.size(), r.c_.begin());
    return r;
}

Jet& Jet::operator+=(const Jet& other) {
    if (other.order_ < order_) *this = truncate(other.order_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
    return *this;
}

Jet& Jet::operator-=(const Jet& other) {
    if (other.order_ < order_) *this = truncate(other.order_);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
    return *this;
}

Jet& Jet::operator*=(const Jet& other) { return *this = *this * other; }
Jet& Jet::operator/=(const Jet& other) { return *this = *this / other; }

Jet& Jet::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

Jet Jet::operator-() const {
    Jet r = *this;
    for (double& v : r.c_) v = -v;
    return r;
}

Jet operator*(const Jet& a, const Jet& b) {
    const int k = std::min(a.order_, b.order_);
    Jet r(k);
    if (k == 0) {
        r.c_[0] = a.c_[0] * b.c_[0];
        return r;
    }
    multiply_into(r.c_.data(), a.c_.data(), b.c_.data(), k);
    return r;
}

void fma_into(Jet& acc, const Jet& a, const Jet& b) {
    const int k = std::min({acc.order(), a.order(), b.order()});
    if (acc.order() != k) acc = acc.truncate(k);
    if (k == 0) {
        acc.taylor(0) += a.value() * b.value();
        return;
    }
    double* out = &acc.taylor(0);
    multiply_into(out, a.coefficients().data(), b.coefficients().data(), k);
}

Jet operator/(const Jet& a, const Jet& b) { return a * reciprocal(b); }

Jet operator/(double s, const Jet& a) { return reciprocal(a) * s; }

Jet compose(const Jet& x, std::span<const double> series) {
    const int k = x.order();
    Jet delta = x;
    delta.taylor(0) = 0.0;
    const int top = std::min<int>(k, static_cast<int>(series.size()) - 1);
    Jet r(k, series[static_cast<std::size_t>(top)]);
    for (int n = top - 1; n >= 0; --n) {
        r = r * delta;
        r += series[static_cast<std::size_t>(n)];
    }
    return r;
}

namespace {

std::vector<double> power_series(double a, double exponent, int k) {
    // (a + t)^r = a^r * sum binom(r, n) (t / a)^n
    std::vector<double> s(static_cast<std::size_t>(k) + 1);
    double coeff = std::pow(a, exponent);
    for (int n = 0; n <= k; ++n) {
        s[static_cast<std::size_t>(n)] = coeff;
        coeff *= (exponent - n) / ((n + 1) * a);
    }
    return s;
}

}  // namespace

Jet reciprocal(const Jet& x) {
    const double a = x.value();
    if (a == 0.0 || !std::isfinite(a)) throw DomainError("division by zero");
    if (x.order() == 0) return Jet(0, 1.0 / a);
    std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
    double c = 1.0 / a;
    for (auto& v : s) {
        v = c;
        c *= -1.0 / a;
    }
    return compose(x, s);
}

Jet exp(const Jet& x) {
    std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
    double c = std::exp(x.value());
    for (std::size_t n = 0; n < s.size(); ++n) {
        s[n] = c;
        c /= static_cast<double>(n + 1);
    }
    return compose(x, s);
}

Jet log(const Jet& x) {
    const double a = x.value();
    if (!(a > 0.0)) throw DomainError("log of non-positive value " + std::to_string(a));
    std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
    s[0] = std::log(a);
    double p = 1.0;
    for (std::size_t n = 1; n < s.size(); ++n) {
        p /= a;
        s[n] = ((n % 2 == 1) ? 1.0 : -1.0) * p / static_cast<double>(n);
    }
    return compose(x, s);
}

Jet sin(const Jet& x) {
    const double sa = std::sin(x.value()), ca = std::cos(x.value());
    const std::array<double, 4> cyc{sa, ca, -sa, -ca};
    std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
    double f = 1.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        if (n > 0) f /= static_cast<double>(n);
        s[n] = cyc[n % 4] * f;
    }
    return compose(x, s);
}

Jet cos(const Jet& x) {
    const double sa = std::sin(x.value()), ca = std::cos(x.value());
    const std::array<double, 4> cyc{ca, -sa, -ca, sa};
    std::vector<double> s(static_cast<std::size_t>(x.order()) + 1);
    double f = 1.0;
    for (std::size_t n = 0; n < s.size(); ++n) {
        if (n > 0) f /= static_cast<double>(n);
        s[n] = cyc[n % 4] * f;
    }
    return compose(x, s);
}

Jet sqrt(const Jet& x) {
    const double a = x.value();
    if (a == 0.0 && x.order() == 0) return Jet(0, 0.0);
    if (!(a > 0.0)) throw DomainError("sqrt of non-positive value " + std::to_string(a));
    return compose(x, power_series(a, 0.5, x.order()));
}

Jet atan(const Jet& x) {
    // atan' = 1/(1 + t^2); expand q(t) = 1/(d0 + d1 t + t^2) around a and integrate.
    const int k = x.order();
    const double a = x.value();
    const double d0 = 1.0 + a * a, d1 = 2.0 * a;
    std::vector<double> q(static_cast<std::size_t>(k) + 1, 0.0);
    for (int n = 0; n <= k; ++n) {
        double v = (n == 0) ? 1.0 : 0.0;
        if (n >= 1) v -= d1 * q[static_cast<std::size_t>(n - 1)];
        if (n >= 2) v -= q[static_cast<std::size_t>(n - 2)];
        q[static_cast<std::size_t>(n)] = v / d0;
    }
    std::vector<double> s(static_cast<std::size_t>(k) + 1);
    s[0] = std::atan(a);
    for (int n = 1; n <= k; ++n) s[static_cast<std::size_t>(n)] = q[static_cast<std::size_t>(n - 1)] / n;
    return compose(x, s);
}

Jet pow(const Jet& x, int exponent) {
    if (exponent < 0) return pow(reciprocal(x), -exponent);
    Jet result(x.order(), 1.0);
    Jet base = x;
    unsigned e = static_cast<unsigned>(exponent);
    while (e != 0) {
        if (e & 1u) result = result * base;
        e >>= 1u;
        if (e != 0) base = base * base;
    }
    return result;
}

Jet pow(const Jet& x, double exponent) {
    if (std::nearbyint(exponent) == exponent && std::abs(exponent) <= 64.0)
        return pow(x, static_cast<int>(exponent));
    const double a = x.value();
    if (!(a > 0.0))
        throw DomainError("non-integer power of non-positive value " + std::to_string(a));
    return compose(x, power_series(a, exponent, x.order()));
}

}  // namespace weylscope
