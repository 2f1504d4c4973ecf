#include "weylscope/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>

#include "weylscope/error.hpp"
#include "weylscope/pipeline.hpp"

namespace weylscope {

namespace {

std::string plain(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

// Number as an expression operand.
std::string num(double v) { return v < 0 ? "(" + plain(v) + ")" : plain(v); }

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_number(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw InputError("catalog: cannot read " + what + " from '" + s + "'");
    return v;
}

unsigned long long parse_seed(const std::string& s) {
    unsigned long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("catalog: cannot read seed from '" + s + "'");
    return v;
}

MetricPtr diagonal_metric(const std::string& c, const Box& domain, const std::string& name) {
    const Expression e = parse_expression(c);
    const Expression z = Expression::literal(0.0);
    return metric_from_components({e, z, z, z, e, z, z, e, z, e}, domain, name);
}

MetricPtr with_sample_box(MetricPtr m, const Box& b) {
    // Entries are built here and handed out read-only afterwards.
    std::const_pointer_cast<MetricField>(m)->set_sample_box(b);
    return m;
}

std::string sphere_pair_potential(double a, double b) {
    return num(2 * a * a) + "*log(1 + x0^2 + x1^2) + " + num(2 * b * b) + "*log(1 + x2^2 + x3^2)";
}

const char* kFsPotential = "log(1 + x0^2 + x1^2 + x2^2 + x3^2)";

}  // namespace

std::string fs_perturbed_potential(double eps, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> centre(-0.25, 0.25), weight(-1.0, 1.0);
    std::array<double, 4> c;
    for (auto& x : c) x = centre(rng);
    std::array<std::string, 4> y;
    for (int i = 0; i < 4; ++i) y[static_cast<std::size_t>(i)] = "(x" + std::to_string(i) + " - " + num(c[static_cast<std::size_t>(i)]) + ")";
    std::string q;
    for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) {
            const double w = weight(rng);
            if (!q.empty()) q += " + ";
            q += num(w) + "*" + y[static_cast<std::size_t>(i)] + "*" + y[static_cast<std::size_t>(j)];
        }
    std::string r2;
    for (int i = 0; i < 4; ++i) r2 += (i ? " + " : "") + y[static_cast<std::size_t>(i)] + "^2";
    return std::string(kFsPotential) + " + " + num(eps) + "*(" + q + ")*exp(-4*(" + r2 + "))";
}

CatalogEntry catalog_get(const std::string& full) {
    const std::vector<std::string> parts = split(full, ':');
    const std::string& base = parts[0];
    const std::size_t nparams = parts.size() - 1;
    const auto require_params = [&](std::size_t lo, std::size_t hi) {
        if (nparams < lo || nparams > hi)
            throw InputError("catalog: '" + base + "' takes " + std::to_string(lo) + " to " + std::to_string(hi) +
                             " parameters, got " + std::to_string(nparams));
    };
    const Box unit = Box::cube(-1.0, 1.0);
    CatalogEntry e;

    if (base == "flat") {
        require_params(0, 0);
        e.name = "flat";
        e.description = "Euclidean metric";
        e.coverage = "all of R^4";
        e.potential = "(x0^2 + x1^2 + x2^2 + x3^2)/2";
        e.metric = with_sample_box(
            metric_from_kahler_potential(parse_expression(*e.potential), Box::whole_space(), "flat"), unit);
        e.truth = {0.0, std::array<double, 3>{0, 0, 0}, true, true, 0, 0.0};
    } else if (base == "round_s4") {
        require_params(0, 0);
        e.name = "round_s4";
        e.description = "unit round 4-sphere, stereographic chart";
        e.coverage = "S^4 minus one point";
        e.metric = with_sample_box(
            diagonal_metric("4/(1 + x0^2 + x1^2 + x2^2 + x3^2)^2", Box::whole_space(), "round_s4"), Box::cube(-2, 2));
        e.truth = {12.0, std::array<double, 3>{0, 0, 0}, true, false, 0, 3.0};
    } else if (base == "s2xs2" || base == "s2xs2_unequal") {
        double a = 1.0, b = 1.0;
        if (base == "s2xs2") {
            require_params(0, 0);
            e.name = "s2xs2";
            e.description = "product of two unit 2-spheres";
        } else {
            require_params(0, 2);
            a = nparams >= 1 ? parse_number(parts[1], "radius a") : 1.0;
            b = nparams >= 2 ? parse_number(parts[2], "radius b") : 2.0;
            if (!(a > 0.0) || !(b > 0.0)) throw InputError("catalog: sphere radii must be positive");
            e.name = "s2xs2_unequal:" + plain(a) + ":" + plain(b);
            e.description = "product of 2-spheres of radii a and b";
        }
        e.coverage = "S^2 x S^2 minus the union of two spheres (one point per factor)";
        e.potential = sphere_pair_potential(a, b);
        e.metric = with_sample_box(metric_from_kahler_potential(parse_expression(*e.potential), Box::whole_space(), e.name),
                                   unit);
        const double s = 2.0 / (a * a) + 2.0 / (b * b);
        const bool einstein = a == b;
        e.truth = {s, std::array<double, 3>{s / 6, -s / 12, -s / 12}, einstein, true, 1,
                   einstein ? std::optional<double>(1.0 / (a * a)) : std::nullopt};
    } else if (base == "fubini_study") {
        require_params(0, 0);
        e.name = "fubini_study";
        e.description = "Fubini-Study metric on CP^2 with Ric = 3g";
        e.coverage = "CP^2 minus a projective line";
        e.potential = kFsPotential;
        e.metric = with_sample_box(
            metric_from_kahler_potential(parse_expression(*e.potential), Box::whole_space(), "fubini_study"), unit);
        e.truth = {12.0, std::array<double, 3>{2, -1, -1}, true, true, 1, 3.0};
    } else if (base == "fs_perturbed") {
        require_params(0, 2);
        const double eps = nparams >= 1 ? parse_number(parts[1], "eps") : 0.05;
        const unsigned long long seed = nparams >= 2 ? parse_seed(parts[2]) : 7;
        if (!(std::abs(eps) <= 0.2)) throw InputError("catalog: fs_perturbed needs |eps| <= 0.2");
        e.name = "fs_perturbed:" + plain(eps) + ":" + std::to_string(seed);
        e.description = "Fubini-Study potential plus a seeded Gaussian-weighted quadratic bump";
        e.coverage = "the box [-1, 1]^4 only";
        e.potential = fs_perturbed_potential(eps, seed);
        e.metric = metric_from_kahler_potential(parse_expression(*e.potential), unit, e.name);
        e.truth = {std::nullopt, std::nullopt, false, true, 1, std::nullopt};
        // s > 0 is what the Derdzinski path needs; the scan also checks positivity of g.
        try {
            derdzinski(e.metric, 11);
        } catch (const DomainError& err) {
            throw DomainError("catalog: fs_perturbed with eps = " + plain(eps) + " is rejected: " + err.what());
        }
    } else {
        throw InputError("catalog: unknown metric '" + base +
                         "' (known: flat, fs_perturbed, fubini_study, round_s4, s2xs2, s2xs2_unequal)");
    }
    return e;
}

std::vector<CatalogEntry> list_catalog() {
    std::vector<CatalogEntry> out;
    for (const char* n : {"flat", "fs_perturbed", "fubini_study", "round_s4", "s2xs2", "s2xs2_unequal"})
        out.push_back(catalog_get(n));
    return out;
}

}  // namespace weylscope
